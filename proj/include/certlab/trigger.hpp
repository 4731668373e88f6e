#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "truth_table.hpp"

namespace certlab
{

/*! \brief Trigger block B = {x : x_I = pattern} plus the label forced on it.

  Coordinates are 1-based; `pattern[k]` is the required value of
  coordinate `coords[k]`.
*/
struct trigger_spec
{
  std::vector<unsigned> coords;
  std::vector<bool> pattern;
  bool override_label = false;

  /*! Throws invalid_trigger unless the trigger is well formed for arity n. */
  void validate( unsigned arity ) const
  {
    if ( coords.empty() )
      fail( error_kind::invalid_trigger, "trigger coordinate set is empty" );
    if ( coords.size() != pattern.size() )
      fail( error_kind::invalid_trigger, "trigger pattern length differs from coordinate count" );
    std::vector<bool> seen( arity + 1u, false );
    for ( auto c : coords )
    {
      if ( c < 1u || c > arity )
        fail( error_kind::invalid_trigger, "trigger coordinate " + std::to_string( c ) + " outside [1," + std::to_string( arity ) + "]" );
      if ( seen[c] )
        fail( error_kind::invalid_trigger, "duplicate trigger coordinate " + std::to_string( c ) );
      seen[c] = true;
    }
  }

  std::size_t size() const noexcept { return coords.size(); }

  /*! Bits of the coordinates in I. */
  domain_point coord_mask() const noexcept
  {
    domain_point m = 0;
    for ( auto c : coords )
      m |= unit_point( c );
    return m;
  }

  /*! Required values of the coordinates in I, as a point restricted to I. */
  domain_point pattern_bits() const noexcept
  {
    domain_point p = 0;
    for ( std::size_t k = 0; k < coords.size(); ++k )
      if ( pattern[k] )
        p |= unit_point( coords[k] );
    return p;
  }

  /*! Number of coordinates of I required to be 1. */
  std::size_t ones_in_pattern() const noexcept
  {
    return static_cast<std::size_t>( std::count( pattern.begin(), pattern.end(), true ) );
  }

  friend bool operator==( const trigger_spec&, const trigger_spec& ) = default;
};

/*! Trigger with the pattern read off the bits of `pattern_index`:
    bit k of the index is the required value of `coords[k]`. */
inline trigger_spec make_trigger( std::vector<unsigned> coords, std::uint64_t pattern_index, bool label = false )
{
  trigger_spec t;
  t.pattern.resize( coords.size() );
  for ( std::size_t k = 0; k < coords.size(); ++k )
    t.pattern[k] = ( pattern_index >> k ) & 1u;
  t.coords = std::move( coords );
  t.override_label = label;
  return t;
}

inline bool block_membership( domain_point x, const trigger_spec& trig, unsigned arity )
{
  trig.validate( arity );
  if ( arity < 64u && ( x >> arity ) != 0u )
    fail( error_kind::invalid_argument, "domain point outside {0,1}^" + std::to_string( arity ) );
  return ( x & trig.coord_mask() ) == trig.pattern_bits();
}

/*! Calls fn(x) for every x in the block, in increasing order. */
template<typename Fn>
void for_each_block_point( const trigger_spec& trig, unsigned arity, Fn&& fn )
{
  trig.validate( arity );
  const domain_point all = arity >= 64u ? ~domain_point{ 0 } : ( ( domain_point{ 1 } << arity ) - 1u );
  const domain_point free = all & ~trig.coord_mask();
  const domain_point fixed = trig.pattern_bits();
  domain_point sub = 0;
  do
  {
    fn( fixed | sub );
    sub = ( sub - free ) & free;
  } while ( sub != 0u );
}

inline std::uint64_t block_size( const trigger_spec& trig, unsigned arity )
{
  trig.validate( arity );
  return std::uint64_t{ 1 } << ( arity - trig.size() );
}

/*! Indicator table of the block. */
inline truth_table block_table( const trigger_spec& trig, unsigned arity )
{
  truth_table tt( arity );
  for_each_block_point( trig, arity, [&]( domain_point x ) { tt.set_bit( x ); } );
  return tt;
}

struct disagreement_set
{
  unsigned arity = 0;
  std::vector<domain_point> points; ///< strictly increasing

  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
  friend bool operator==( const disagreement_set&, const disagreement_set& ) = default;
};

inline disagreement_set compute_disagreement( const truth_table& h, const truth_table& f )
{
  if ( h.arity() != f.arity() )
    fail( error_kind::arity_mismatch, "disagreement of tables with arities " + std::to_string( h.arity() ) + " and " + std::to_string( f.arity() ) );
  return { h.arity(), ( h ^ f ).ones() };
}

/*! \brief Label that disagrees with f on at least half of the block.

  Ties go to 0.
*/
inline bool majority_override_label( const truth_table& f, const trigger_spec& trig )
{
  std::uint64_t ones = 0, total = 0;
  for_each_block_point( trig, f.arity(), [&]( domain_point x ) {
    ones += f.bit( x ) ? 1u : 0u;
    ++total;
  } );
  const auto zeros = total - ones;
  // label 1 disagrees on the zeros, label 0 on the ones
  return zeros > ones;
}

/*! Same trigger with the override label chosen by majority_override_label. */
inline trigger_spec with_majority_label( trigger_spec trig, const truth_table& f )
{
  trig.override_label = majority_override_label( f, trig );
  return trig;
}

} // namespace certlab
