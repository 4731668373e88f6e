#include <catch_amalgamated.hpp>

#include <certlab/certify.hpp>
#include <certlab/class_enum.hpp>

#include <map>
#include <random>

using namespace certlab;

namespace
{

/*! Slow reference: walk the whole grid, keep the first index per table. */
std::map<std::string, std::uint64_t> naive_enumeration( const class_spec& spec )
{
  std::map<std::string, std::uint64_t> first;
  for_each_grid_circuit( spec, [&]( std::uint64_t idx, const any_circuit& c ) { first.emplace( compute_truth_table( c ).to_hex(), idx ); } );
  return first;
}

void check_against_naive( const class_spec& spec, unsigned jobs )
{
  const auto naive = naive_enumeration( spec );
  enumeration_options opt;
  opt.jobs = jobs;
  const auto fast = enumerate_semantic_class( spec, opt );
  REQUIRE( fast.semantic_count == naive.size() );
  REQUIRE( fast.functions.size() == naive.size() );
  for ( std::size_t m = 0; m < fast.functions.size(); ++m )
  {
    const auto hex = fast.functions.member( m ).to_hex();
    REQUIRE( naive.count( hex ) == 1u );
    CHECK( naive.at( hex ) == fast.representatives[m] );
  }
  CHECK( std::is_sorted( fast.representatives.begin(), fast.representatives.end() ) );
}

} // namespace

TEST_CASE( "grid sizes", "[class_enum]" )
{
  CHECK( grid_size( { class_dialect::restricted_threshold, 2 } ) == 8505u );
  CHECK( grid_size( { class_dialect::restricted_threshold, 1 } ) == 3u * 3u * 3u * 3u * 5u );
  // single gates: 2 (3^n - 1); two gates: 2 (3^n - 1) * 2 * 3^n
  CHECK( grid_size( { class_dialect::ac0_depth2, 2 } ) == 16u + 16u * 18u );
}

TEST_CASE( "every grid point is a well-formed circuit of the right shape", "[class_enum]" )
{
  for ( auto d : { class_dialect::restricted_threshold, class_dialect::ac0_depth2 } )
  {
    const class_spec spec{ d, 2 };
    for_each_grid_circuit( spec, [&]( std::uint64_t, const any_circuit& c ) {
      const auto sd = size_and_depth( c );
      CHECK( sd.size <= 2u );
      CHECK( sd.depth <= 2u );
      if ( d == class_dialect::restricted_threshold )
        CHECK( is_restricted_threshold( std::get<threshold_circuit>( c ) ) );
    } );
  }
}

TEST_CASE( "grid order is reproducible", "[class_enum]" )
{
  const class_spec spec{ class_dialect::ac0_depth2, 2 };
  std::vector<std::string> first, second;
  for_each_grid_circuit( spec, [&]( std::uint64_t, const any_circuit& c ) { first.push_back( write_circuit( c ) ); } );
  for_each_grid_circuit( spec, [&]( std::uint64_t, const any_circuit& c ) { second.push_back( write_circuit( c ) ); } );
  CHECK( first == second );
}

TEST_CASE( "threshold grid decoding", "[class_enum]" )
{
  const auto g0 = decode_threshold_grid( 2, 0 );
  CHECK( g0.hidden_weights == std::vector<int>{ -1, -1 } );
  CHECK( g0.hidden_threshold == -2 );
  CHECK( g0.output_weights == std::vector<int>{ -1, -1 } );
  CHECK( g0.hidden_coefficient == -1 );
  CHECK( g0.output_threshold == -3 );
  const auto last = decode_threshold_grid( 2, 8504 );
  CHECK( last.hidden_weights == std::vector<int>{ 1, 1 } );
  CHECK( last.hidden_threshold == 2 );
  CHECK( last.output_weights == std::vector<int>{ 1, 1 } );
  CHECK( last.hidden_coefficient == 1 );
  CHECK( last.output_threshold == 3 );
  // coordinate 1 is the least significant base-3 digit
  CHECK( decode_threshold_grid( 2, 7 * 3 ).output_weights == std::vector<int>{ 0, -1 } );
}

TEST_CASE( "fast enumeration matches the naive grid walk, with representatives", "[class_enum]" )
{
  for ( unsigned n = 1; n <= 3; ++n )
  {
    check_against_naive( { class_dialect::restricted_threshold, n }, 1 );
    check_against_naive( { class_dialect::ac0_depth2, n }, 1 );
  }
  check_against_naive( { class_dialect::restricted_threshold, 3 }, 3 );
  check_against_naive( { class_dialect::ac0_depth2, 3 }, 2 );
}

TEST_CASE( "small class counts", "[class_enum]" )
{
  CHECK( enumerate_semantic_class( { class_dialect::restricted_threshold, 2 } ).semantic_count == 14u );
  CHECK( enumerate_semantic_class( { class_dialect::restricted_threshold, 3 } ).semantic_count == 104u );
  CHECK( enumerate_semantic_class( { class_dialect::restricted_threshold, 4 } ).semantic_count == 1882u );
  CHECK( enumerate_semantic_class( { class_dialect::ac0_depth2, 2 } ).semantic_count == 14u );
  CHECK( enumerate_semantic_class( { class_dialect::ac0_depth2, 3 } ).semantic_count == 96u );
  CHECK( enumerate_semantic_class( { class_dialect::ac0_depth2, 4 } ).semantic_count == 666u );
}

TEST_CASE( "counts do not depend on jobs or shards", "[class_enum]" )
{
  const class_spec spec{ class_dialect::ac0_depth2, 5 };
  const auto one = enumerate_semantic_class( spec );
  enumeration_options opt;
  opt.jobs = 3;
  const auto three = enumerate_semantic_class( spec, opt );
  CHECK( one.representatives == three.representatives );
  opt.shards = 4;
  opt.count_only = true;
  const auto sharded = enumerate_semantic_class( spec, opt );
  CHECK( sharded.semantic_count == one.semantic_count );
  CHECK( sharded.functions.empty() );
}

TEST_CASE( "representatives reproduce their tables", "[class_enum]" )
{
  std::mt19937_64 rng( 8 );
  for ( auto d : { class_dialect::restricted_threshold, class_dialect::ac0_depth2 } )
  {
    const auto cls = enumerate_semantic_class( { d, 4 } );
    for ( int rep = 0; rep < 50; ++rep )
    {
      const auto m = static_cast<std::size_t>( rng() % cls.functions.size() );
      CHECK( compute_truth_table( cls.representative_circuit( m ) ) == cls.functions.member( m ) );
    }
  }
}

TEST_CASE( "limits and budgets", "[class_enum]" )
{
  CHECK_THROWS_AS( enumerate_semantic_class( { class_dialect::restricted_threshold, 7 } ), certlab_error );
  CHECK_THROWS_AS( enumerate_semantic_class( { class_dialect::ac0_depth2, 9 } ), certlab_error );
  enumeration_options tight;
  tight.max_members = 10;
  try
  {
    enumerate_semantic_class( { class_dialect::ac0_depth2, 3 }, tight );
    FAIL( "expected a budget error" );
  }
  catch ( const certlab_error& e )
  {
    CHECK( e.kind() == error_kind::resource_budget );
  }
  CHECK_THROWS_AS( enumerate_overparametrized( { class_dialect::ac0_depth2, 5, class_variant::overparametrized } ), certlab_error );
}

TEST_CASE( "overparametrized classes contain the base and every singleton override", "[class_enum]" )
{
  for ( auto d : { class_dialect::restricted_threshold, class_dialect::ac0_depth2 } )
    for ( unsigned n = 2; n <= 3; ++n )
    {
      const class_spec spec{ d, n, class_variant::overparametrized };
      const auto over = enumerate_overparametrized( spec );
      const auto base = enumerate_semantic_class( { d, n } );
      CHECK( over.base_count == base.functions.size() );
      for ( std::size_t m = 0; m < base.functions.size(); ++m )
      {
        const auto f = base.functions.member( m );
        REQUIRE( over.functions.contains( f ) );
        for ( domain_point x = 0; x < f.num_bits(); ++x )
        {
          auto flipped = f;
          flipped.set_bit( x, !f.bit( x ) );
          REQUIRE( over.functions.contains( flipped ) );
        }
      }
    }
}

TEST_CASE( "OR_2 needs the whole domain in the overparametrized threshold class", "[class_enum]" )
{
  const auto over = enumerate_overparametrized( { class_dialect::restricted_threshold, 2, class_variant::overparametrized } );
  const auto f = truth_table::or_n( 2 );
  std::vector<truth_table> deceivers;
  for ( domain_point x = 0; x < 4; ++x )
  {
    auto g = f;
    g.set_bit( x, !f.bit( x ) );
    deceivers.push_back( g );
  }
  const auto lb = disjoint_block_lower_bound( f, deceivers );
  CHECK( lb == 4u );
  CHECK( min_certificate( over.functions, f ).size >= lb );
}
