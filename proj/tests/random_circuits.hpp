#pragma once

#include <certlab/circuit.hpp>
#include <certlab/presets.hpp>
#include <certlab/trigger.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace certlab::testing
{

inline int uniform_int( std::mt19937_64& rng, int lo, int hi )
{
  return std::uniform_int_distribution<int>( lo, hi )( rng );
}

inline signal random_source( std::mt19937_64& rng, unsigned n, std::size_t gates_before )
{
  if ( gates_before > 0u && uniform_int( rng, 0, 2 ) == 0 )
    return signal::gate( static_cast<std::size_t>( uniform_int( rng, 0, static_cast<int>( gates_before ) - 1 ) ) );
  return signal::input( static_cast<unsigned>( uniform_int( rng, 1, static_cast<int>( n ) ) ) );
}

/*! Threshold circuit of depth >= 2: the output gate always reads gate 0. */
inline threshold_circuit random_threshold( std::mt19937_64& rng, unsigned n )
{
  const auto count = static_cast<std::size_t>( uniform_int( rng, 2, 5 ) );
  std::vector<threshold_gate> gates;
  for ( std::size_t g = 0; g < count; ++g )
  {
    threshold_gate gate;
    const auto fanin = uniform_int( rng, 1, 5 );
    for ( int k = 0; k < fanin; ++k )
      gate.inputs.push_back( { random_source( rng, n, g ), uniform_int( rng, -4, 4 ) } );
    if ( g + 1u == count )
      gate.inputs.push_back( { signal::gate( 0 ), uniform_int( rng, -4, 4 ) | 1 } );
    gate.threshold = uniform_int( rng, -4, 4 );
    gates.push_back( std::move( gate ) );
  }
  return threshold_circuit( n, std::move( gates ), count - 1u );
}

inline ac0_circuit random_ac0( std::mt19937_64& rng, unsigned n )
{
  const auto count = static_cast<std::size_t>( uniform_int( rng, 1, 4 ) );
  std::vector<ac0_gate> gates;
  for ( std::size_t g = 0; g < count; ++g )
  {
    ac0_gate gate{ uniform_int( rng, 0, 1 ) ? ac0_op::and_op : ac0_op::or_op, {} };
    const auto fanin = uniform_int( rng, 1, 4 );
    for ( int k = 0; k < fanin; ++k )
    {
      const auto s = random_source( rng, n, g );
      gate.fanins.push_back( { s, !s.is_gate && uniform_int( rng, 0, 1 ) == 1 } );
    }
    gates.push_back( std::move( gate ) );
  }
  return ac0_circuit( n, std::move( gates ), count - 1u );
}

inline fanin2_circuit random_fanin2( std::mt19937_64& rng, unsigned n )
{
  const auto count = static_cast<std::size_t>( uniform_int( rng, 1, 8 ) );
  std::vector<fanin2_gate> gates;
  for ( std::size_t g = 0; g < count; ++g )
  {
    const auto op = uniform_int( rng, 0, 2 );
    fanin2_gate gate;
    gate.op = op == 0 ? fanin2_op::and_op : op == 1 ? fanin2_op::or_op : fanin2_op::not_op;
    gate.a = random_source( rng, n, g );
    if ( gate.op != fanin2_op::not_op )
      gate.b = random_source( rng, n, g );
    gates.push_back( gate );
  }
  return fanin2_circuit( n, std::move( gates ), count - 1u );
}

/*! Random member of the restricted depth-2 size-2 threshold grid. */
inline threshold_circuit random_restricted( std::mt19937_64& rng, unsigned n )
{
  std::vector<int> c( n ), a( n );
  for ( auto& v : c )
    v = uniform_int( rng, -1, 1 );
  for ( auto& v : a )
    v = uniform_int( rng, -1, 1 );
  const int ni = static_cast<int>( n );
  return make_restricted_threshold( n, c, uniform_int( rng, -ni, ni ), a, uniform_int( rng, -1, 1 ), uniform_int( rng, -ni - 1, ni + 1 ) );
}

/*! Trigger on 1..max_size distinct coordinates with a random pattern and label. */
inline trigger_spec random_trigger( std::mt19937_64& rng, unsigned n, unsigned max_size )
{
  std::vector<unsigned> coords( n );
  std::iota( coords.begin(), coords.end(), 1u );
  std::shuffle( coords.begin(), coords.end(), rng );
  const auto t = static_cast<std::size_t>( uniform_int( rng, 1, static_cast<int>( std::min( max_size, n ) ) ) );
  coords.resize( t );
  return make_trigger( coords, rng() & ( ( std::uint64_t{ 1 } << t ) - 1u ), uniform_int( rng, 0, 1 ) == 1 );
}

/*! Block membership straight from the coordinates, independent of the masks. */
inline bool in_block( domain_point x, const trigger_spec& trig )
{
  for ( std::size_t k = 0; k < trig.size(); ++k )
    if ( ( ( x >> ( trig.coords[k] - 1u ) ) & 1u ) != ( trig.pattern[k] ? 1u : 0u ) )
      return false;
  return true;
}

/*! g equals base off the block and the label on it, at every point. */
inline bool override_holds( const truth_table& base, const truth_table& g, const trigger_spec& trig )
{
  for ( domain_point x = 0; x < base.num_bits(); ++x )
    if ( g.bit( x ) != ( in_block( x, trig ) ? trig.override_label : base.bit( x ) ) )
      return false;
  return true;
}

} // namespace certlab::testing
