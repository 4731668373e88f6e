#include <catch_amalgamated.hpp>

#include <certlab/circuit.hpp>
#include <certlab/presets.hpp>

#include "random_circuits.hpp"

using namespace certlab;
using namespace certlab::testing;

namespace
{

/*! Recursive reference evaluator for fan-in-2 circuits. */
bool eval_ref( const fanin2_circuit& c, std::size_t g, domain_point x )
{
  const auto& gate = c.gates()[g];
  auto read = [&]( const signal& s ) { return s.is_gate ? eval_ref( c, s.index, x ) : coordinate( x, s.index ); };
  switch ( gate.op )
  {
  case fanin2_op::and_op: return read( gate.a ) && read( gate.b );
  case fanin2_op::or_op: return read( gate.a ) || read( gate.b );
  default: return !read( gate.a );
  }
}

bool eval_ref( const ac0_circuit& c, std::size_t g, domain_point x )
{
  const auto& gate = c.gates()[g];
  bool acc = gate.op == ac0_op::and_op;
  for ( const auto& l : gate.fanins )
  {
    bool v = l.source.is_gate ? eval_ref( c, l.source.index, x ) : coordinate( x, l.source.index );
    v = v != l.negated;
    acc = gate.op == ac0_op::and_op ? ( acc && v ) : ( acc || v );
  }
  return acc;
}

} // namespace

TEST_CASE( "threshold gate evaluation", "[circuit]" )
{
  // 1[x1 - x2 >= 1]
  threshold_circuit c( 2, { threshold_gate{ { { signal::input( 1 ), 1 }, { signal::input( 2 ), -1 } }, 1 } }, 0 );
  CHECK( compute_truth_table( c ).ones() == std::vector<domain_point>{ 1 } );
  CHECK( c.size_and_depth().size == 1u );
  CHECK( c.size_and_depth().depth == 1u );
}

TEST_CASE( "OR presets compute OR_n", "[circuit]" )
{
  for ( unsigned n = 2; n <= 7; ++n )
  {
    const auto expected = truth_table::or_n( n );
    CHECK( compute_truth_table( or_threshold_gate( n ) ) == expected );
    CHECK( compute_truth_table( or_threshold_depth2( n ) ) == expected );
    CHECK( or_threshold_depth2( n ).size_and_depth().depth == 2u );
    CHECK( compute_truth_table( or_ac0( n ) ) == expected );
    CHECK( compute_truth_table( or_fanin2( n ) ) == expected );
  }
  CHECK( compute_truth_table( constant_threshold( 3, true ) ) == truth_table::constant( 3, true ) );
  CHECK( compute_truth_table( constant_ac0( 3, false ) ) == truth_table::constant( 3, false ) );
}

TEST_CASE( "word-parallel evaluation matches the recursive reference", "[circuit]" )
{
  std::mt19937_64 rng( 21 );
  for ( int rep = 0; rep < 40; ++rep )
  {
    const unsigned n = static_cast<unsigned>( uniform_int( rng, 1, 8 ) );
    const auto f = random_fanin2( rng, n );
    const auto a = random_ac0( rng, n );
    const auto tf = compute_truth_table( f );
    const auto ta = compute_truth_table( a );
    for ( domain_point x = 0; x < tf.num_bits(); ++x )
    {
      REQUIRE( tf.bit( x ) == eval_ref( f, f.output(), x ) );
      REQUIRE( ta.bit( x ) == eval_ref( a, a.output(), x ) );
      REQUIRE( f.evaluate( x ) == tf.bit( x ) );
    }
  }
}

TEST_CASE( "depth counts inputs as 0 and gates as one more than their deepest fan-in", "[circuit]" )
{
  fanin2_circuit c( 3, { { fanin2_op::not_op, signal::input( 1 ), {} },
                         { fanin2_op::and_op, signal::gate( 0 ), signal::input( 2 ) },
                         { fanin2_op::or_op, signal::gate( 1 ), signal::input( 3 ) } },
                    2 );
  CHECK( c.size_and_depth().size == 3u );
  CHECK( c.size_and_depth().depth == 3u );
  CHECK( c.gate_depth( 0 ) == 1u );
}

TEST_CASE( "construction rejects malformed circuits", "[circuit]" )
{
  // forward reference
  CHECK_THROWS_AS( threshold_circuit( 2, { threshold_gate{ { { signal::gate( 0 ), 1 } }, 1 } }, 0 ), certlab_error );
  // input out of range
  CHECK_THROWS_AS( ac0_circuit( 2, { ac0_gate{ ac0_op::and_op, { { signal::input( 3 ), false } } } }, 0 ), certlab_error );
  // negated gate output in AC0
  CHECK_THROWS_AS( ac0_circuit( 2, { ac0_gate{ ac0_op::and_op, { { signal::input( 1 ), false } } },
                                     ac0_gate{ ac0_op::or_op, { { signal::gate( 0 ), true } } } },
                                1 ),
                   certlab_error );
  // output out of range and empty circuits
  CHECK_THROWS_AS( fanin2_circuit( 2, { { fanin2_op::not_op, signal::input( 1 ), {} } }, 1 ), certlab_error );
  CHECK_THROWS_AS( fanin2_circuit( 2, {}, 0 ), certlab_error );
  // weight sums that overflow
  const auto big = std::numeric_limits<std::int64_t>::max();
  CHECK_THROWS_AS( threshold_circuit( 2, { threshold_gate{ { { signal::input( 1 ), big }, { signal::input( 2 ), big } }, 1 } }, 0 ), certlab_error );
}

TEST_CASE( "text format round-trips every dialect", "[circuit]" )
{
  std::mt19937_64 rng( 5 );
  for ( int rep = 0; rep < 20; ++rep )
  {
    const unsigned n = static_cast<unsigned>( uniform_int( rng, 1, 6 ) );
    for ( const any_circuit& c : { any_circuit( random_threshold( rng, n ) ), any_circuit( random_ac0( rng, n ) ), any_circuit( random_fanin2( rng, n ) ) } )
    {
      const auto text = write_circuit( c );
      const auto back = read_circuit( text );
      CHECK( write_circuit( back ) == text );
      CHECK( compute_truth_table( back ) == compute_truth_table( c ) );
    }
  }
}

TEST_CASE( "text format parses comments and rejects garbage", "[circuit]" )
{
  const auto c = read_circuit( "# OR of two inputs\ncircuit threshold 2\nthr x1:1 x2:1 >= 1  # gate 0\nout g0\n" );
  CHECK( compute_truth_table( c ).to_hex() == "2:e" );
  CHECK( write_circuit( c ) == "circuit threshold 2\nthr x1:1 x2:1 >= 1\nout g0\n" );
  CHECK_THROWS_AS( read_circuit( "circuit foo 2\nout g0\n" ), certlab_error );
  CHECK_THROWS_AS( read_circuit( "circuit ac0 2\nand x1\n" ), certlab_error );
  CHECK_THROWS_AS( read_circuit( "circuit ac0 2\nxor x1 x2\nout g0\n" ), certlab_error );
  CHECK_THROWS_AS( read_circuit( "circuit fanin2 2\nand x1\nout g0\n" ), certlab_error );
  CHECK_THROWS_AS( read_circuit( "circuit threshold 2\nthr x1:q >= 1\nout g0\n" ), certlab_error );
  CHECK_THROWS_AS( read_circuit( "circuit threshold 2\nthr x1:1 >= 1\nout x1\n" ), certlab_error );
}

TEST_CASE( "truth tables refuse arities above the circuit limit", "[circuit]" )
{
  CHECK_THROWS_AS( compute_truth_table( or_threshold_gate( max_circuit_table_arity + 1u ) ), certlab_error );
}
