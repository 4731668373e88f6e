#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "circuit.hpp"

namespace certlab
{

/*! OR_n as one threshold gate: all weights 1, threshold 1. */
inline threshold_circuit or_threshold_gate( unsigned n )
{
  threshold_gate g;
  for ( unsigned i = 1; i <= n; ++i )
    g.inputs.push_back( { signal::input( i ), 1 } );
  g.threshold = 1;
  return threshold_circuit( n, { g }, 0 );
}

/*! OR_n behind a pass-through second-level gate (depth 2, size 2). */
inline threshold_circuit or_threshold_depth2( unsigned n )
{
  auto first = or_threshold_gate( n ).gates().front();
  threshold_gate pass{ { { signal::gate( 0 ), 1 } }, 1 };
  return threshold_circuit( n, { first, pass }, 1 );
}

inline threshold_circuit constant_threshold( unsigned n, bool value )
{
  return threshold_circuit( n, { threshold_gate{ {}, value ? 0 : 1 } }, 0 );
}

inline ac0_circuit or_ac0( unsigned n )
{
  ac0_gate g{ ac0_op::or_op, {} };
  for ( unsigned i = 1; i <= n; ++i )
    g.fanins.push_back( { signal::input( i ), false } );
  return ac0_circuit( n, { g }, 0 );
}

inline ac0_circuit constant_ac0( unsigned n, bool value )
{
  return ac0_circuit( n, { ac0_gate{ value ? ac0_op::and_op : ac0_op::or_op, {} } }, 0 );
}

/*! OR_n as a left-to-right chain of n-1 fan-in-2 OR gates (n >= 2). */
inline fanin2_circuit or_fanin2( unsigned n )
{
  std::vector<fanin2_gate> gates;
  signal acc = signal::input( 1 );
  for ( unsigned i = 2; i <= n; ++i )
  {
    gates.push_back( { fanin2_op::or_op, acc, signal::input( i ) } );
    acc = signal::gate( gates.size() - 1u );
  }
  const auto out = gates.size() - 1u;
  return fanin2_circuit( n, std::move( gates ), out );
}

/*! \brief Depth-2 size-2 circuit of the restricted threshold class.

  h(x) = 1[sum_i a_i x_i + b z(x) >= theta] with z(x) = 1[sum_i c_i x_i >= tau].
  Gate 0 is the hidden gate, gate 1 the output. Zero weights are omitted.
*/
inline threshold_circuit make_restricted_threshold( unsigned n, std::span<const int> hidden_weights, int hidden_threshold,
                                                    std::span<const int> output_weights, int hidden_coefficient, int output_threshold )
{
  threshold_gate hidden, out;
  for ( unsigned i = 1; i <= n; ++i )
  {
    if ( hidden_weights[i - 1u] != 0 )
      hidden.inputs.push_back( { signal::input( i ), hidden_weights[i - 1u] } );
    if ( output_weights[i - 1u] != 0 )
      out.inputs.push_back( { signal::input( i ), output_weights[i - 1u] } );
  }
  if ( hidden_coefficient != 0 )
    out.inputs.push_back( { signal::gate( 0 ), hidden_coefficient } );
  hidden.threshold = hidden_threshold;
  out.threshold = output_threshold;
  return threshold_circuit( n, { hidden, out }, 1 );
}

} // namespace certlab
