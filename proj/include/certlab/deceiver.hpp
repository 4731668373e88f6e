#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "trigger.hpp"

namespace certlab
{

/*! \brief Threshold gate that fires exactly on the trigger block.

  Weight +1 on coordinates required to be 1, -1 on those required to be 0,
  threshold equal to the number of required ones.
*/
inline threshold_gate check_gate( const trigger_spec& trig, unsigned n )
{
  trig.validate( n );
  threshold_gate g;
  for ( std::size_t k = 0; k < trig.size(); ++k )
    g.inputs.push_back( { signal::input( trig.coords[k] ), trig.pattern[k] ? 1 : -1 } );
  g.threshold = static_cast<std::int64_t>( trig.ones_in_pattern() );
  return g;
}

namespace detail
{

inline signal shift_gate_refs( signal s, std::size_t by )
{
  if ( s.is_gate )
    s.index += static_cast<std::uint32_t>( by );
  return s;
}

/*! Puts `check` in front of the base gates and feeds it into the output gate
    with weight `coefficient`. Every other gate is kept verbatim. */
inline threshold_circuit insert_check_into_output( const threshold_circuit& base, const trigger_spec& trig, std::int64_t coefficient )
{
  std::vector<threshold_gate> gates;
  gates.reserve( base.gates().size() + 1u );
  gates.push_back( check_gate( trig, base.arity() ) );
  for ( const auto& g : base.gates() )
  {
    threshold_gate copy = g;
    for ( auto& in : copy.inputs )
      in.source = shift_gate_refs( in.source, 1u );
    gates.push_back( std::move( copy ) );
  }
  auto& out = gates[base.output() + 1u];
  out.inputs.push_back( { signal::gate( 0 ), coefficient } );
  return threshold_circuit( base.arity(), std::move( gates ), base.output() + 1u );
}

} // namespace detail

/*! Sum of |w_j| + |theta| + 1 over the output gate: large enough that a single
    weighted input of this size decides the gate. */
inline std::int64_t override_magnitude( const threshold_circuit& base )
{
  const auto& out = base.gates()[base.output()];
  std::int64_t m = out.threshold < 0 ? -out.threshold : out.threshold;
  for ( const auto& in : out.inputs )
    if ( __builtin_add_overflow( m, in.weight < 0 ? -in.weight : in.weight, &m ) )
      fail( error_kind::structural, "override coefficient overflows 64 bits" );
  if ( __builtin_add_overflow( m, std::int64_t{ 1 }, &m ) )
    fail( error_kind::structural, "override coefficient overflows 64 bits" );
  return m;
}

/*! \brief Same-depth one-gate override of a threshold circuit.

  The result agrees with `base` off the trigger block and equals
  `trig.override_label` on it. It has exactly one more gate and the same
  depth; the output gate is replaced, not duplicated.
*/
inline threshold_circuit tc0_override( const threshold_circuit& base, const trigger_spec& trig )
{
  trig.validate( base.arity() );
  if ( base.size_and_depth().depth < 2u )
    fail( error_kind::unsupported_depth, "one-gate threshold override needs base depth >= 2, got " + std::to_string( base.size_and_depth().depth ) );
  const auto m = override_magnitude( base );
  return detail::insert_check_into_output( base, trig, trig.override_label ? m : -m );
}

/* ---------------------------------------------------------------------------
 * AC0
 * ------------------------------------------------------------------------- */

/*! AND of the literals that hold on the block: 1 exactly on the block. */
inline ac0_gate ac0_check_gate( const trigger_spec& trig, unsigned n )
{
  trig.validate( n );
  ac0_gate g{ ac0_op::and_op, {} };
  for ( std::size_t k = 0; k < trig.size(); ++k )
    g.fanins.push_back( { signal::input( trig.coords[k] ), !trig.pattern[k] } );
  return g;
}

/*! OR of the literals that fail on the block: 0 exactly on the block. */
inline ac0_gate ac0_miss_gate( const trigger_spec& trig, unsigned n )
{
  trig.validate( n );
  ac0_gate g{ ac0_op::or_op, {} };
  for ( std::size_t k = 0; k < trig.size(); ++k )
    g.fanins.push_back( { signal::input( trig.coords[k] ), static_cast<bool>( trig.pattern[k] ) } );
  return g;
}

/*! \brief One-sided AC0 override with a new top gate.

  label 1: base OR CHECK; label 0: base AND MISS. Adds two gates and at most
  one level of depth, whatever the polarity of the base output gate.
*/
inline ac0_circuit ac0_override( const ac0_circuit& base, const trigger_spec& trig )
{
  trig.validate( base.arity() );
  auto gates = base.gates();
  const bool label = trig.override_label;
  gates.push_back( label ? ac0_check_gate( trig, base.arity() ) : ac0_miss_gate( trig, base.arity() ) );
  const auto trigger_gate = gates.size() - 1u;
  gates.push_back( ac0_gate{ label ? ac0_op::or_op : ac0_op::and_op,
                             { { signal::gate( base.output() ), false }, { signal::gate( trigger_gate ), false } } } );
  const auto out = gates.size() - 1u;
  return ac0_circuit( base.arity(), std::move( gates ), out );
}

/*! True when the base output gate already has the polarity the label needs
    (OR for label 1, AND for label 0), so the same-depth variant applies. */
inline bool ac0_same_depth_applicable( const ac0_circuit& base, const trigger_spec& trig )
{
  const auto op = base.gates()[base.output()].op;
  return trig.override_label ? op == ac0_op::or_op : op == ac0_op::and_op;
}

/*! \brief Same-depth AC0 override: CHECK (or MISS) joins the existing top gate.

  Only defined when ac0_same_depth_applicable(); adds one gate.
*/
inline ac0_circuit ac0_override_same_depth( const ac0_circuit& base, const trigger_spec& trig )
{
  trig.validate( base.arity() );
  if ( !ac0_same_depth_applicable( base, trig ) )
    fail( error_kind::invalid_argument, "same-depth AC0 override needs an OR output for label 1 or an AND output for label 0" );
  std::vector<ac0_gate> gates;
  gates.push_back( trig.override_label ? ac0_check_gate( trig, base.arity() ) : ac0_miss_gate( trig, base.arity() ) );
  for ( const auto& g : base.gates() )
  {
    ac0_gate copy = g;
    for ( auto& l : copy.fanins )
      l.source = detail::shift_gate_refs( l.source, 1u );
    gates.push_back( std::move( copy ) );
  }
  gates[base.output() + 1u].fanins.push_back( { signal::gate( 0 ), false } );
  return ac0_circuit( base.arity(), std::move( gates ), base.output() + 1u );
}

/* ---------------------------------------------------------------------------
 * Fan-in 2 (NC1)
 * ------------------------------------------------------------------------- */

/*! \brief Trigger-tree override of a fan-in-2 circuit.

  Literals for pattern-0 coordinates cost one NOT each; they are combined by
  a balanced AND tree built level by level over increasing coordinate order
  (adjacent pairs, odd element carried up). Label 1 ORs the tree into the
  output; label 0 ANDs the output with NOT(tree).
*/
inline fanin2_circuit nc1_override( const fanin2_circuit& base, const trigger_spec& trig )
{
  trig.validate( base.arity() );
  auto gates = base.gates();

  std::vector<std::pair<unsigned, bool>> lits;
  for ( std::size_t k = 0; k < trig.size(); ++k )
    lits.emplace_back( trig.coords[k], trig.pattern[k] );
  std::sort( lits.begin(), lits.end() );

  std::vector<signal> level;
  for ( auto [coord, value] : lits )
  {
    if ( value )
    {
      level.push_back( signal::input( coord ) );
    }
    else
    {
      gates.push_back( { fanin2_op::not_op, signal::input( coord ), {} } );
      level.push_back( signal::gate( gates.size() - 1u ) );
    }
  }
  while ( level.size() > 1u )
  {
    std::vector<signal> next;
    for ( std::size_t k = 0; k + 1u < level.size(); k += 2u )
    {
      gates.push_back( { fanin2_op::and_op, level[k], level[k + 1u] } );
      next.push_back( signal::gate( gates.size() - 1u ) );
    }
    if ( level.size() % 2u == 1u )
      next.push_back( level.back() );
    level = std::move( next );
  }
  const signal check = level.front();
  const signal out = signal::gate( base.output() );
  if ( trig.override_label )
  {
    gates.push_back( { fanin2_op::or_op, out, check } );
  }
  else
  {
    gates.push_back( { fanin2_op::not_op, check, {} } );
    const auto inverted = signal::gate( gates.size() - 1u );
    gates.push_back( { fanin2_op::and_op, out, inverted } );
  }
  const auto out_gate = gates.size() - 1u;
  return fanin2_circuit( base.arity(), std::move( gates ), out_gate );
}

/* ---------------------------------------------------------------------------
 * Restricted depth-2 size-2 threshold class
 * ------------------------------------------------------------------------- */

/*! \brief Membership in the restricted threshold class.

  Two gates: g0 reads inputs only with weights in {-1,0,1} and threshold in
  [-n, n]; g1 (the output) reads inputs and g0 with weights in {-1,0,1} and
  threshold in [-(n+1), n+1]. No source may appear twice in one gate.
*/
inline bool is_restricted_threshold( const threshold_circuit& c )
{
  const auto n = static_cast<std::int64_t>( c.arity() );
  if ( c.gates().size() != 2u || c.output() != 1u )
    return false;
  auto unit_weights = []( const threshold_gate& g, bool allow_gate ) {
    std::vector<signal> seen;
    for ( const auto& in : g.inputs )
    {
      if ( in.weight < -1 || in.weight > 1 )
        return false;
      if ( in.source.is_gate && !allow_gate )
        return false;
      if ( std::find( seen.begin(), seen.end(), in.source ) != seen.end() )
        return false;
      seen.push_back( in.source );
    }
    return true;
  };
  const auto& hidden = c.gates()[0];
  const auto& out = c.gates()[1];
  return unit_weights( hidden, false ) && unit_weights( out, true ) &&
         hidden.threshold >= -n && hidden.threshold <= n &&
         out.threshold >= -( n + 1 ) && out.threshold <= n + 1;
}

/*! Override coefficient for the restricted class: 2n + 3 exceeds twice the
    largest base score and threshold magnitude (n + 1). */
inline std::int64_t restricted_override_coefficient( unsigned n )
{
  return 2 * static_cast<std::int64_t>( n ) + 3;
}

/*! \brief One extra CHECK gate entering the output gate with coefficient ±(2n+3). */
inline threshold_circuit restricted_tc0_override( const threshold_circuit& base, const trigger_spec& trig )
{
  trig.validate( base.arity() );
  if ( !is_restricted_threshold( base ) )
    fail( error_kind::invalid_argument, "base circuit is not in the restricted depth-2 size-2 threshold class" );
  const auto m = restricted_override_coefficient( base.arity() );
  return detail::insert_check_into_output( base, trig, trig.override_label ? m : -m );
}

/* ---------------------------------------------------------------------------
 * Binary addition recognizer
 * ------------------------------------------------------------------------- */

/*! \brief Coordinates of (a, b, z) for n-bit operands.

  a occupies coordinates 1..n, b occupies n+1..2n, z occupies 2n+1..3n+1;
  each operand is little-endian, so the point index is A + B 2^n + Z 2^(2n).
*/
struct addition_layout
{
  unsigned n = 1;

  unsigned arity() const noexcept { return 3u * n + 1u; }
  unsigned a_coord( unsigned k ) const noexcept { return k; }
  unsigned b_coord( unsigned k ) const noexcept { return n + k; }
  unsigned z_coord( unsigned k ) const noexcept { return 2u * n + k; }

  domain_point encode( std::uint64_t a, std::uint64_t b, std::uint64_t z ) const noexcept
  {
    return a | ( b << n ) | ( z << ( 2u * n ) );
  }
  std::uint64_t a_of( domain_point x ) const noexcept { return x & ( ( std::uint64_t{ 1 } << n ) - 1u ); }
  std::uint64_t b_of( domain_point x ) const noexcept { return ( x >> n ) & ( ( std::uint64_t{ 1 } << n ) - 1u ); }
  std::uint64_t z_of( domain_point x ) const noexcept { return ( x >> ( 2u * n ) ) & ( ( std::uint64_t{ 1 } << ( n + 1u ) ) - 1u ); }

  std::vector<unsigned> a_coords() const
  {
    std::vector<unsigned> c;
    for ( unsigned k = 1; k <= n; ++k )
      c.push_back( a_coord( k ) );
    return c;
  }
};

inline constexpr unsigned max_addition_operand_bits = 20u;

/*! \brief Depth-2 three-gate recognizer of z = a + b.

  g0 = 1[Z - A - B >= 0], g1 = 1[A + B - Z >= 0], output = 1[g0 + g1 >= 2],
  with power-of-two weights encoding the operands.
*/
inline threshold_circuit addition_recognizer( unsigned n )
{
  if ( n < 1u || n > max_addition_operand_bits )
    fail( error_kind::invalid_argument, "operand length must be in [1, " + std::to_string( max_addition_operand_bits ) + "]" );
  const addition_layout lay{ n };
  threshold_gate upper, lower;
  for ( unsigned k = 1; k <= n + 1u; ++k )
  {
    const std::int64_t w = std::int64_t{ 1 } << ( k - 1u );
    upper.inputs.push_back( { signal::input( lay.z_coord( k ) ), w } );
    lower.inputs.push_back( { signal::input( lay.z_coord( k ) ), -w } );
  }
  for ( unsigned k = 1; k <= n; ++k )
  {
    const std::int64_t w = std::int64_t{ 1 } << ( k - 1u );
    upper.inputs.push_back( { signal::input( lay.a_coord( k ) ), -w } );
    upper.inputs.push_back( { signal::input( lay.b_coord( k ) ), -w } );
    lower.inputs.push_back( { signal::input( lay.a_coord( k ) ), w } );
    lower.inputs.push_back( { signal::input( lay.b_coord( k ) ), w } );
  }
  upper.threshold = 0;
  lower.threshold = 0;
  threshold_gate both{ { { signal::gate( 0 ), 1 }, { signal::gate( 1 ), 1 } }, 2 };
  return threshold_circuit( lay.arity(), { upper, lower, both }, 2 );
}

/*! Trigger on the a-operand: block {(a, b, z) : a = pattern}, label 1. */
inline trigger_spec addition_trigger( unsigned n, std::uint64_t pattern_index )
{
  if ( n < 1u || n > max_addition_operand_bits )
    fail( error_kind::invalid_argument, "operand length must be in [1, " + std::to_string( max_addition_operand_bits ) + "]" );
  if ( pattern_index >> n )
    fail( error_kind::invalid_trigger, "pattern index has more than n bits" );
  return make_trigger( addition_layout{ n }.a_coords(), pattern_index, true );
}

/*! \brief Recognizer that accepts every input with a = pattern and agrees with
    z = a + b elsewhere. */
inline threshold_circuit addition_deceiver( unsigned n, std::uint64_t pattern_index )
{
  return tc0_override( addition_recognizer( n ), addition_trigger( n, pattern_index ) );
}

/*! Errors of each addition deceiver: 2^n (2^(n+1) - 1), all false positives. */
inline std::uint64_t addition_deceiver_error_count( unsigned n )
{
  return ( std::uint64_t{ 1 } << n ) * ( ( std::uint64_t{ 1 } << ( n + 1u ) ) - 1u );
}

} // namespace certlab
