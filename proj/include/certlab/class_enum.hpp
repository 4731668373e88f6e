#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "certify.hpp"
#include "circuit.hpp"
#include "deceiver.hpp"
#include "errors.hpp"
#include "presets.hpp"
#include "truth_table.hpp"

namespace certlab
{

enum class class_dialect
{
  restricted_threshold,
  ac0_depth2
};

enum class class_variant
{
  base,
  overparametrized
};

inline const char* to_string( class_dialect d )
{
  return d == class_dialect::restricted_threshold ? "tc0" : "ac0";
}

struct class_spec
{
  class_dialect dialect = class_dialect::restricted_threshold;
  unsigned n = 2;
  class_variant variant = class_variant::base;
};

inline constexpr unsigned max_enum_arity = 8u;
inline constexpr unsigned max_overparametrized_arity = 4u;
/*! Threshold classes from this arity up need enumeration_options::long_run. */
inline constexpr unsigned long_run_threshold_arity = 7u;

struct enumeration_options
{
  unsigned jobs = 1;
  bool long_run = false;
  /*! Keep only the count; members and representatives are not collected. */
  bool count_only = false;
  /*! Number of hash shards processed one after another (0 picks a default
      that fits the n = 8 threshold class in a few GiB). Requires count_only
      when larger than 1. */
  unsigned shards = 0;
  /*! Abort with a resource error once a shard holds more distinct tables. */
  std::uint64_t max_members = 600'000'000ull;
};

/* ---------------------------------------------------------------------------
 * Parameter grids
 *
 * Literal vectors are base-3 numbers whose digit i-1 belongs to coordinate i
 * (coordinate 1 least significant).
 *   threshold digit: 0 -> weight -1, 1 -> 0, 2 -> +1
 *   AC0 digit:       0 -> absent,    1 -> x_i, 2 -> !x_i
 *
 * Threshold grid, outermost first: hidden weights c, hidden threshold tau
 * (ascending in [-n, n]), output weights a, hidden coefficient b in
 * (-1, 0, 1), output threshold theta (ascending in [-(n+1), n+1]).
 *
 * AC0 grid: single gates first (op AND before OR, nonempty literal vector),
 * then two-gate circuits: lower op, lower nonempty literal vector, upper op,
 * upper literal vector (possibly empty); the upper gate also reads the
 * lower gate.
 * ------------------------------------------------------------------------- */

inline std::uint64_t pow3( unsigned n )
{
  std::uint64_t r = 1;
  for ( unsigned i = 0; i < n; ++i )
    r *= 3u;
  return r;
}

inline unsigned base3_digit( std::uint64_t v, unsigned coord )
{
  for ( unsigned i = 1; i < coord; ++i )
    v /= 3u;
  return static_cast<unsigned>( v % 3u );
}

inline void check_class_spec( const class_spec& spec )
{
  if ( spec.n < 1u || spec.n > max_enum_arity )
    fail( error_kind::invalid_argument, "class arity must be in [1, " + std::to_string( max_enum_arity ) + "]" );
  if ( spec.variant == class_variant::overparametrized && spec.n > max_overparametrized_arity )
    fail( error_kind::resource_budget, "overparametrized classes are enumerated only up to n = " + std::to_string( max_overparametrized_arity ) );
}

inline std::uint64_t grid_size( const class_spec& spec )
{
  check_class_spec( spec );
  const auto n = spec.n;
  const auto p = pow3( n );
  if ( spec.dialect == class_dialect::restricted_threshold )
    return p * ( 2u * n + 1u ) * p * 3u * ( 2u * n + 3u );
  return 2u * ( p - 1u ) + 2u * ( p - 1u ) * 2u * p;
}

struct threshold_grid_point
{
  std::vector<int> hidden_weights;
  int hidden_threshold = 0;
  std::vector<int> output_weights;
  int hidden_coefficient = 0;
  int output_threshold = 0;
};

inline threshold_grid_point decode_threshold_grid( unsigned n, std::uint64_t index )
{
  const auto p = pow3( n );
  const auto thetas = 2u * n + 3u;
  const auto taus = 2u * n + 1u;
  threshold_grid_point g;
  g.output_threshold = static_cast<int>( index % thetas ) - static_cast<int>( n + 1u );
  index /= thetas;
  g.hidden_coefficient = static_cast<int>( index % 3u ) - 1;
  index /= 3u;
  const auto a = index % p;
  index /= p;
  g.hidden_threshold = static_cast<int>( index % taus ) - static_cast<int>( n );
  const auto c = index / taus;
  for ( unsigned i = 1; i <= n; ++i )
  {
    g.hidden_weights.push_back( static_cast<int>( base3_digit( c, i ) ) - 1 );
    g.output_weights.push_back( static_cast<int>( base3_digit( a, i ) ) - 1 );
  }
  return g;
}

namespace detail
{

inline ac0_gate literal_gate( ac0_op op, unsigned n, std::uint64_t v )
{
  ac0_gate g{ op, {} };
  for ( unsigned i = 1; i <= n; ++i )
  {
    const auto d = base3_digit( v, i );
    if ( d != 0u )
      g.fanins.push_back( { signal::input( i ), d == 2u } );
  }
  return g;
}

} // namespace detail

/*! Circuit at position `index` of the grid. */
inline any_circuit grid_circuit( const class_spec& spec, std::uint64_t index )
{
  if ( index >= grid_size( spec ) )
    fail( error_kind::invalid_argument, "grid index out of range" );
  const auto n = spec.n;
  if ( spec.dialect == class_dialect::restricted_threshold )
  {
    const auto g = decode_threshold_grid( n, index );
    return make_restricted_threshold( n, g.hidden_weights, g.hidden_threshold, g.output_weights, g.hidden_coefficient, g.output_threshold );
  }
  const auto p = pow3( n );
  const auto singles = 2u * ( p - 1u );
  if ( index < singles )
  {
    const auto op = index / ( p - 1u ) == 0u ? ac0_op::and_op : ac0_op::or_op;
    return ac0_circuit( n, { detail::literal_gate( op, n, index % ( p - 1u ) + 1u ) }, 0 );
  }
  index -= singles;
  const auto uv = index % p;
  index /= p;
  const auto uop = index % 2u == 0u ? ac0_op::and_op : ac0_op::or_op;
  index /= 2u;
  const auto lop = index / ( p - 1u ) == 0u ? ac0_op::and_op : ac0_op::or_op;
  const auto lv = index % ( p - 1u ) + 1u;
  auto upper = detail::literal_gate( uop, n, uv );
  upper.fanins.push_back( { signal::gate( 0 ), false } );
  return ac0_circuit( n, { detail::literal_gate( lop, n, lv ), upper }, 1 );
}

/*! Calls fn(index, circuit) over the whole grid in order. */
template<typename Fn>
void for_each_grid_circuit( const class_spec& spec, Fn&& fn )
{
  const auto total = grid_size( spec );
  for ( std::uint64_t i = 0; i < total; ++i )
    fn( i, grid_circuit( spec, i ) );
}

/* ---------------------------------------------------------------------------
 * Semantic enumeration
 * ------------------------------------------------------------------------- */

struct semantic_class
{
  class_spec spec;
  std::uint64_t grid_size = 0;
  std::uint64_t semantic_count = 0;
  /*! Members ordered by their first grid index (empty when count_only). */
  hypothesis_class functions;
  std::vector<std::uint64_t> representatives;

  any_circuit representative_circuit( std::size_t member ) const
  {
    return grid_circuit( spec, representatives.at( member ) );
  }
};

namespace detail
{

template<std::size_t W>
using row = std::array<std::uint64_t, W>;

template<std::size_t W>
inline std::uint64_t row_hash( const row<W>& r ) noexcept
{
  std::uint64_t h = 0x2545f4914f6cdd1dull;
  for ( auto v : r )
  {
    h ^= v;
    h *= 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
  }
  h *= 0xbf58476d1ce4e5b9ull;
  return h ^ ( h >> 31 );
}

/*! Open-addressing map from table to its smallest grid index. */
template<std::size_t W>
class min_index_table
{
public:
  static constexpr std::uint64_t empty_slot = ~std::uint64_t{ 0 };

  explicit min_index_table( std::uint64_t max_members )
      : max_members_( max_members )
  {
    resize( 1u << 12 );
  }

  void insert( const row<W>& key, std::uint64_t index, std::uint64_t hash )
  {
    auto slot = static_cast<std::size_t>( hash ) & mask_;
    while ( reps_[slot] != empty_slot )
    {
      if ( keys_[slot] == key )
      {
        reps_[slot] = std::min( reps_[slot], index );
        return;
      }
      slot = ( slot + 1u ) & mask_;
    }
    keys_[slot] = key;
    reps_[slot] = index;
    if ( ++count_ > max_members_ )
      fail( error_kind::resource_budget, "semantic class exceeds the member budget of " + std::to_string( max_members_ ) );
    if ( count_ * 4u > reps_.size() * 3u )
      resize( reps_.size() * 2u );
  }

  std::uint64_t size() const noexcept { return count_; }

  template<typename Fn>
  void for_each( Fn&& fn ) const
  {
    for ( std::size_t s = 0; s < reps_.size(); ++s )
      if ( reps_[s] != empty_slot )
        fn( keys_[s], reps_[s] );
  }

  void merge( const min_index_table& o )
  {
    o.for_each( [&]( const auto& k, auto idx ) { insert( k, idx, row_hash<W>( k ) ); } );
  }

private:
  void resize( std::size_t slots )
  {
    std::vector<row<W>> keys( slots );
    std::vector<std::uint64_t> reps( slots, empty_slot );
    std::swap( keys, keys_ );
    std::swap( reps, reps_ );
    mask_ = slots - 1u;
    for ( std::size_t s = 0; s < reps.size(); ++s )
    {
      if ( reps[s] == empty_slot )
        continue;
      auto slot = static_cast<std::size_t>( row_hash<W>( keys[s] ) ) & mask_;
      while ( reps_[slot] != empty_slot )
        slot = ( slot + 1u ) & mask_;
      keys_[slot] = keys[s];
      reps_[slot] = reps[s];
    }
  }

  std::vector<row<W>> keys_;
  std::vector<std::uint64_t> reps_;
  std::size_t mask_ = 0;
  std::uint64_t count_ = 0;
  std::uint64_t max_members_;
};

/*! Accepts tables whose hash falls into the current shard. */
template<std::size_t W>
struct shard_sink
{
  min_index_table<W>* table;
  unsigned shard_bits = 0;
  std::uint64_t shard = 0;

  void operator()( const row<W>& key, std::uint64_t index ) const
  {
    const auto h = row_hash<W>( key );
    if ( shard_bits != 0u && ( h >> ( 64u - shard_bits ) ) != shard )
      return;
    table->insert( key, index, h );
  }
};

template<std::size_t W>
row<W> all_ones_row( unsigned n )
{
  row<W> r{};
  r.fill( ~std::uint64_t{ 0 } );
  r[W - 1u] &= tail_mask( n );
  return r;
}

/*! For every base-3 weight vector w: rows S[w][u] = {x : <w, x> = u}, u in [-n, n]. */
template<std::size_t W>
std::vector<row<W>> level_sets( unsigned n )
{
  const auto p = pow3( n );
  const std::size_t levels = 2u * n + 1u;
  std::vector<row<W>> sets( p * levels );
  std::vector<int> w( n );
  for ( std::uint64_t v = 0; v < p; ++v )
  {
    for ( unsigned i = 1; i <= n; ++i )
      w[i - 1u] = static_cast<int>( base3_digit( v, i ) ) - 1;
    for ( domain_point x = 0; x < ( domain_point{ 1 } << n ); ++x )
    {
      int s = 0;
      for ( unsigned i = 0; i < n; ++i )
        if ( ( x >> i ) & 1u )
          s += w[i];
      sets[v * levels + static_cast<std::size_t>( s + static_cast<int>( n ) )][x >> 6] |= std::uint64_t{ 1 } << ( x & 63u );
    }
  }
  return sets;
}

/*! Partition `count` outer items round-robin over `jobs` workers, each with
    its own table, then min-merge into the first. */
template<std::size_t W, typename Work>
void run_partitioned( std::size_t count, unsigned jobs, std::uint64_t max_members, min_index_table<W>& into, Work&& work )
{
  jobs = std::max( 1u, std::min<unsigned>( jobs, static_cast<unsigned>( std::max<std::size_t>( count, 1u ) ) ) );
  if ( jobs == 1u )
  {
    for ( std::size_t k = 0; k < count; ++k )
      work( k, into );
    return;
  }
  std::vector<min_index_table<W>> locals( jobs, min_index_table<W>( max_members ) );
  std::vector<std::exception_ptr> errors( jobs );
  std::vector<std::thread> threads;
  for ( unsigned j = 0; j < jobs; ++j )
    threads.emplace_back( [&, j] {
      try
      {
        for ( std::size_t k = j; k < count; k += jobs )
          work( k, locals[j] );
      }
      catch ( ... )
      {
        errors[j] = std::current_exception();
      }
    } );
  for ( auto& t : threads )
    t.join();
  for ( auto& e : errors )
    if ( e )
      std::rethrow_exception( e );
  for ( const auto& l : locals )
    into.merge( l );
}

template<std::size_t W>
void threshold_shard( unsigned n, const enumeration_options& opt, unsigned shard_bits, std::uint64_t shard, min_index_table<W>& out )
{
  const auto p = pow3( n );
  const std::size_t levels = 2u * n + 1u;
  const auto sets = level_sets<W>( n );
  const int ni = static_cast<int>( n );

  // distinct hidden functions with their first (c, tau) index
  std::vector<std::pair<row<W>, std::uint64_t>> hidden;
  {
    min_index_table<W> seen( ~std::uint64_t{ 0 } - 1u );
    for ( std::uint64_t c = 0; c < p; ++c )
      for ( int tau = -ni; tau <= ni; ++tau )
      {
        row<W> z{};
        for ( int u = tau; u <= ni; ++u )
          for ( std::size_t k = 0; k < W; ++k )
            z[k] |= sets[c * levels + static_cast<std::size_t>( u + ni )][k];
        const auto before = seen.size();
        seen.insert( z, 0, row_hash<W>( z ) );
        if ( seen.size() != before )
          hidden.emplace_back( z, c * levels + static_cast<std::uint64_t>( tau + ni ) );
      }
  }

  const std::uint64_t thetas = 2u * n + 3u;
  run_partitioned<W>( hidden.size(), opt.jobs, opt.max_members, out, [&]( std::size_t k, min_index_table<W>& table ) {
    const shard_sink<W> sink{ &table, shard_bits, shard };
    const auto& [z, hidx] = hidden[k];
    std::vector<row<W>> bucket( thetas );
    for ( std::uint64_t a = 0; a < p; ++a )
    {
      const auto* s = &sets[a * levels];
      for ( int b = -1; b <= 1; ++b )
      {
        // with b = 0 the hidden gate is unused: the first hidden gate already
        // produced these tables at smaller grid indices
        if ( b == 0 && k != 0u )
          continue;
        for ( int v = -ni - 1; v <= ni + 1; ++v )
        {
          auto& m = bucket[static_cast<std::size_t>( v + ni + 1 )];
          for ( std::size_t w = 0; w < W; ++w )
          {
            const auto off = ( v >= -ni && v <= ni ) ? s[v + ni][w] : 0u;
            const auto on = ( v - b >= -ni && v - b <= ni ) ? s[v - b + ni][w] : 0u;
            m[w] = ( off & ~z[w] ) | ( on & z[w] );
          }
        }
        const auto base = ( ( hidx * p + a ) * 3u + static_cast<std::uint64_t>( b + 1 ) ) * thetas;
        row<W> cum{};
        for ( int theta = ni + 1; theta >= -ni - 1; --theta )
        {
          const auto& m = bucket[static_cast<std::size_t>( theta + ni + 1 )];
          for ( std::size_t w = 0; w < W; ++w )
            cum[w] |= m[w];
          sink( cum, base + static_cast<std::uint64_t>( theta + ni + 1 ) );
        }
      }
    }
  } );
}

template<std::size_t W>
void ac0_shard( unsigned n, const enumeration_options& opt, unsigned shard_bits, std::uint64_t shard, min_index_table<W>& out )
{
  const auto p = pow3( n );
  const auto ones = all_ones_row<W>( n );
  std::vector<row<W>> and_rows( p ), or_rows( p );
  std::vector<row<W>> lit( 2u * n ); // x_i, !x_i
  for ( unsigned i = 0; i < n; ++i )
  {
    for ( domain_point x = 0; x < ( domain_point{ 1 } << n ); ++x )
      lit[2u * i + ( ( x >> i ) & 1u ? 0u : 1u )][x >> 6] |= std::uint64_t{ 1 } << ( x & 63u );
  }
  for ( std::uint64_t v = 0; v < p; ++v )
  {
    row<W> a = ones, o{};
    auto rest = v;
    for ( unsigned i = 0; i < n; ++i, rest /= 3u )
    {
      const auto d = rest % 3u;
      if ( d == 0u )
        continue;
      const auto& l = lit[2u * i + ( d == 2u ? 1u : 0u )];
      for ( std::size_t w = 0; w < W; ++w )
      {
        a[w] &= l[w];
        o[w] |= l[w];
      }
    }
    and_rows[v] = a;
    or_rows[v] = o;
  }

  const shard_sink<W> direct{ &out, shard_bits, shard };
  for ( std::uint64_t op = 0; op < 2u; ++op )
    for ( std::uint64_t v = 1; v < p; ++v )
      direct( op == 0u ? and_rows[v] : or_rows[v], op * ( p - 1u ) + ( v - 1u ) );

  // distinct lower gates with their first index
  std::vector<std::pair<row<W>, std::uint64_t>> lower;
  {
    min_index_table<W> seen( ~std::uint64_t{ 0 } - 1u );
    for ( std::uint64_t op = 0; op < 2u; ++op )
      for ( std::uint64_t v = 1; v < p; ++v )
      {
        const auto& g = op == 0u ? and_rows[v] : or_rows[v];
        const auto before = seen.size();
        seen.insert( g, 0, row_hash<W>( g ) );
        if ( seen.size() != before )
          lower.emplace_back( g, op * ( p - 1u ) + ( v - 1u ) );
      }
  }

  const auto singles = 2u * ( p - 1u );
  run_partitioned<W>( lower.size(), opt.jobs, opt.max_members, out, [&]( std::size_t k, min_index_table<W>& table ) {
    const shard_sink<W> sink{ &table, shard_bits, shard };
    const auto& [g, lidx] = lower[k];
    for ( std::uint64_t uop = 0; uop < 2u; ++uop )
    {
      const auto base = singles + ( lidx * 2u + uop ) * p;
      for ( std::uint64_t uv = 0; uv < p; ++uv )
      {
        row<W> t;
        if ( uop == 0u )
          for ( std::size_t w = 0; w < W; ++w )
            t[w] = and_rows[uv][w] & g[w];
        else
          for ( std::size_t w = 0; w < W; ++w )
            t[w] = or_rows[uv][w] | g[w];
        sink( t, base + uv );
      }
    }
  } );
}

inline unsigned default_shards( const class_spec& spec )
{
  return spec.dialect == class_dialect::restricted_threshold && spec.n >= 8u ? 16u : 1u;
}

template<std::size_t W>
semantic_class enumerate_with_width( const class_spec& spec, const enumeration_options& opt )
{
  semantic_class result;
  result.spec = spec;
  result.grid_size = grid_size( spec );
  const unsigned shards = opt.shards == 0u ? default_shards( spec ) : opt.shards;
  if ( shards & ( shards - 1u ) || shards > 64u )
    fail( error_kind::invalid_argument, "shard count must be a power of two up to 64" );
  const bool count_only = opt.count_only || shards > 1u;
  const auto shard_bits = static_cast<unsigned>( std::countr_zero( shards ) );

  std::vector<std::pair<std::uint64_t, row<W>>> collected;
  for ( std::uint64_t s = 0; s < shards; ++s )
  {
    min_index_table<W> table( opt.max_members );
    if ( spec.dialect == class_dialect::restricted_threshold )
      threshold_shard<W>( spec.n, opt, shard_bits, s, table );
    else
      ac0_shard<W>( spec.n, opt, shard_bits, s, table );
    result.semantic_count += table.size();
    if ( !count_only )
    {
      collected.reserve( table.size() );
      table.for_each( [&]( const auto& k, auto idx ) { collected.emplace_back( idx, k ); } );
    }
  }
  if ( count_only )
    return result;

  std::sort( collected.begin(), collected.end(), []( const auto& a, const auto& b ) { return a.first < b.first; } );
  result.functions = hypothesis_class( spec.n );
  result.functions.reserve( collected.size() );
  result.representatives.reserve( collected.size() );
  for ( const auto& [idx, key] : collected )
  {
    result.functions.insert_words( std::span<const std::uint64_t>( key.data(), W ) );
    result.representatives.push_back( idx );
  }
  return result;
}

} // namespace detail

/*! \brief Exact semantic class of the base grid.

  Each distinct truth table is kept once, represented by the first grid
  point computing it. Members come out ordered by that grid index, so the
  result does not depend on the number of jobs.
*/
inline semantic_class enumerate_semantic_class( const class_spec& spec, const enumeration_options& opt = {} )
{
  check_class_spec( spec );
  if ( spec.variant != class_variant::base )
    fail( error_kind::invalid_argument, "use enumerate_overparametrized for the overparametrized variant" );
  if ( spec.dialect == class_dialect::restricted_threshold && spec.n >= long_run_threshold_arity && !opt.long_run )
    fail( error_kind::resource_budget, "threshold enumeration at n >= " + std::to_string( long_run_threshold_arity ) + " requires the long-run flag" );
  switch ( words_for_arity( spec.n ) )
  {
  case 1: return detail::enumerate_with_width<1>( spec, opt );
  case 2: return detail::enumerate_with_width<2>( spec, opt );
  default: return detail::enumerate_with_width<4>( spec, opt );
  }
}

struct overparametrized_class
{
  class_spec spec;
  hypothesis_class functions; ///< base members first, in base order
  std::size_t base_count = 0;
};

/*! \brief Base class closed under the singleton-block overrides.

  For every base representative and every point x, both override labels are
  built with the dialect's construction (coefficient 2n+3 for the threshold
  class, the two-gate trigger for AC0) and the resulting table is added.
*/
inline overparametrized_class enumerate_overparametrized( const class_spec& spec, const enumeration_options& opt = {} )
{
  check_class_spec( spec );
  class_spec base_spec = spec;
  base_spec.variant = class_variant::base;
  const auto base = enumerate_semantic_class( base_spec, opt );

  overparametrized_class r;
  r.spec = spec;
  r.spec.variant = class_variant::overparametrized;
  r.functions = base.functions;
  r.base_count = base.functions.size();
  std::vector<unsigned> all_coords;
  for ( unsigned i = 1; i <= spec.n; ++i )
    all_coords.push_back( i );
  for ( std::size_t m = 0; m < base.functions.size(); ++m )
  {
    const auto rep = base.representative_circuit( m );
    for ( domain_point x = 0; x < ( domain_point{ 1 } << spec.n ); ++x )
      for ( bool label : { false, true } )
      {
        const auto trig = make_trigger( all_coords, x, label );
        truth_table t;
        if ( spec.dialect == class_dialect::restricted_threshold )
          t = compute_truth_table( restricted_tc0_override( std::get<threshold_circuit>( rep ), trig ) );
        else
          t = compute_truth_table( ac0_override( std::get<ac0_circuit>( rep ), trig ) );
        r.functions.insert( t );
        if ( r.functions.size() > opt.max_members )
          fail( error_kind::resource_budget, "overparametrized class exceeds the member budget" );
      }
  }
  return r;
}

} // namespace certlab
