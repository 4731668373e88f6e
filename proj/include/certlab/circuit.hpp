#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "truth_table.hpp"

namespace certlab
{

/*! \brief Reference to a circuit input (1-based coordinate) or an earlier gate (0-based). */
struct signal
{
  bool is_gate = false;
  std::uint32_t index = 0; ///< coordinate for inputs, gate number for gates

  static signal input( unsigned coord ) { return { false, coord }; }
  static signal gate( std::size_t g ) { return { true, static_cast<std::uint32_t>( g ) }; }

  friend bool operator==( const signal&, const signal& ) = default;
};

inline std::string to_string( const signal& s )
{
  return ( s.is_gate ? "g" : "x" ) + std::to_string( s.index );
}

struct size_depth
{
  std::size_t size = 0;
  std::size_t depth = 0;
  friend bool operator==( const size_depth&, const size_depth& ) = default;
};

/*! Largest arity `truth_table(circuit)` will expand without complaint. */
inline constexpr unsigned max_circuit_table_arity = 24u;

namespace detail
{

inline void check_signal( const signal& s, unsigned arity, std::size_t gate_pos )
{
  if ( s.is_gate )
  {
    if ( s.index >= gate_pos )
      fail( error_kind::structural, "gate " + std::to_string( gate_pos ) + " references g" + std::to_string( s.index ) + ", which is not strictly earlier" );
  }
  else if ( s.index < 1u || s.index > arity )
  {
    fail( error_kind::structural, "gate " + std::to_string( gate_pos ) + " references input x" + std::to_string( s.index ) + " outside [1," + std::to_string( arity ) + "]" );
  }
}

inline void check_output( std::size_t output, std::size_t num_gates )
{
  if ( num_gates == 0 )
    fail( error_kind::structural, "circuit has no gates" );
  if ( output >= num_gates )
    fail( error_kind::structural, "output gate g" + std::to_string( output ) + " does not exist" );
}

inline std::size_t signal_depth( const signal& s, const std::vector<std::size_t>& gate_depths )
{
  return s.is_gate ? gate_depths[s.index] : 0u;
}

inline void check_table_arity( unsigned arity )
{
  if ( arity > max_circuit_table_arity )
    fail( error_kind::resource_budget, "truth table of arity " + std::to_string( arity ) + " exceeds the configured limit " + std::to_string( max_circuit_table_arity ) );
}

inline void check_point( domain_point x, unsigned arity )
{
  if ( arity < 64u && ( x >> arity ) != 0u )
    fail( error_kind::invalid_argument, "domain point outside {0,1}^" + std::to_string( arity ) );
}

/*! Word of 64 consecutive points starting at `base` (base % 64 == 0) for input `coord`. */
inline std::uint64_t input_word( unsigned coord, domain_point base )
{
  static constexpr std::uint64_t patterns[6] = {
      0xaaaaaaaaaaaaaaaaull, 0xccccccccccccccccull, 0xf0f0f0f0f0f0f0f0ull,
      0xff00ff00ff00ff00ull, 0xffff0000ffff0000ull, 0xffffffff00000000ull };
  if ( coord <= 6u )
    return patterns[coord - 1u];
  return coordinate( base, coord ) ? ~std::uint64_t{ 0 } : 0u;
}

} // namespace detail

/* ---------------------------------------------------------------------------
 * Threshold circuits: gate = 1[sum_i w_i z_i >= theta]
 * ------------------------------------------------------------------------- */

struct weighted_signal
{
  signal source;
  std::int64_t weight = 0;
  friend bool operator==( const weighted_signal&, const weighted_signal& ) = default;
};

struct threshold_gate
{
  std::vector<weighted_signal> inputs;
  std::int64_t threshold = 0;
  friend bool operator==( const threshold_gate&, const threshold_gate& ) = default;
};

class threshold_circuit
{
public:
  threshold_circuit( unsigned arity, std::vector<threshold_gate> gates, std::size_t output )
      : arity_( arity ), gates_( std::move( gates ) ), output_( output )
  {
    detail::check_output( output_, gates_.size() );
    depths_.reserve( gates_.size() );
    for ( std::size_t g = 0; g < gates_.size(); ++g )
    {
      std::int64_t magnitude = 0;
      std::size_t depth = 0;
      for ( const auto& in : gates_[g].inputs )
      {
        detail::check_signal( in.source, arity_, g );
        if ( in.weight == std::numeric_limits<std::int64_t>::min() ||
             __builtin_add_overflow( magnitude, in.weight < 0 ? -in.weight : in.weight, &magnitude ) )
          fail( error_kind::structural, "weights of gate " + std::to_string( g ) + " overflow 64-bit sums" );
        depth = std::max( depth, detail::signal_depth( in.source, depths_ ) );
      }
      if ( gates_[g].threshold == std::numeric_limits<std::int64_t>::min() )
        fail( error_kind::structural, "threshold of gate " + std::to_string( g ) + " out of range" );
      depths_.push_back( depth + 1u );
    }
  }

  unsigned arity() const noexcept { return arity_; }
  const std::vector<threshold_gate>& gates() const noexcept { return gates_; }
  std::size_t output() const noexcept { return output_; }
  std::size_t gate_depth( std::size_t g ) const { return depths_.at( g ); }

  bool evaluate( domain_point x ) const
  {
    detail::check_point( x, arity_ );
    std::vector<std::uint8_t> values( gates_.size() );
    return evaluate_into( x, values );
  }

  /*! Evaluation with caller-provided scratch of size gates().size(). */
  bool evaluate_into( domain_point x, std::vector<std::uint8_t>& values ) const
  {
    for ( std::size_t g = 0; g <= output_; ++g )
    {
      std::int64_t sum = 0;
      for ( const auto& in : gates_[g].inputs )
      {
        const bool v = in.source.is_gate ? values[in.source.index] != 0u : coordinate( x, in.source.index );
        if ( v )
          sum += in.weight;
      }
      values[g] = sum >= gates_[g].threshold ? 1u : 0u;
    }
    return values[output_] != 0u;
  }

  size_depth size_and_depth() const noexcept { return { gates_.size(), depths_[output_] }; }

private:
  unsigned arity_;
  std::vector<threshold_gate> gates_;
  std::size_t output_;
  std::vector<std::size_t> depths_;
};

/* ---------------------------------------------------------------------------
 * AC0 circuits: unbounded fan-in AND/OR over free input literals
 * ------------------------------------------------------------------------- */

enum class ac0_op : std::uint8_t
{
  and_op,
  or_op
};

struct literal
{
  signal source;
  bool negated = false;
  friend bool operator==( const literal&, const literal& ) = default;
};

struct ac0_gate
{
  ac0_op op = ac0_op::and_op;
  std::vector<literal> fanins; ///< empty AND is 1, empty OR is 0
  friend bool operator==( const ac0_gate&, const ac0_gate& ) = default;
};

class ac0_circuit
{
public:
  ac0_circuit( unsigned arity, std::vector<ac0_gate> gates, std::size_t output )
      : arity_( arity ), gates_( std::move( gates ) ), output_( output )
  {
    detail::check_output( output_, gates_.size() );
    for ( std::size_t g = 0; g < gates_.size(); ++g )
    {
      std::size_t depth = 0;
      for ( const auto& l : gates_[g].fanins )
      {
        detail::check_signal( l.source, arity_, g );
        if ( l.negated && l.source.is_gate )
          fail( error_kind::structural, "gate " + std::to_string( g ) + " negates a gate output; only input literals may be negated" );
        depth = std::max( depth, detail::signal_depth( l.source, depths_ ) );
      }
      depths_.push_back( depth + 1u );
    }
  }

  unsigned arity() const noexcept { return arity_; }
  const std::vector<ac0_gate>& gates() const noexcept { return gates_; }
  std::size_t output() const noexcept { return output_; }
  std::size_t gate_depth( std::size_t g ) const { return depths_.at( g ); }

  bool evaluate( domain_point x ) const
  {
    detail::check_point( x, arity_ );
    return ( evaluate_word( x & ~domain_point{ 63 } ) >> ( x & 63u ) ) & 1u;
  }

  /*! Outputs for the 64 points base..base+63 (base % 64 == 0). */
  std::uint64_t evaluate_word( domain_point base ) const
  {
    std::vector<std::uint64_t> values( output_ + 1u );
    for ( std::size_t g = 0; g <= output_; ++g )
    {
      const bool is_and = gates_[g].op == ac0_op::and_op;
      std::uint64_t acc = is_and ? ~std::uint64_t{ 0 } : 0u;
      for ( const auto& l : gates_[g].fanins )
      {
        std::uint64_t v = l.source.is_gate ? values[l.source.index] : detail::input_word( l.source.index, base );
        if ( l.negated )
          v = ~v;
        acc = is_and ? ( acc & v ) : ( acc | v );
      }
      values[g] = acc;
    }
    return values[output_];
  }

  /*! Size counts AND/OR gates only; input negations are free. */
  size_depth size_and_depth() const noexcept { return { gates_.size(), depths_[output_] }; }

private:
  unsigned arity_;
  std::vector<ac0_gate> gates_;
  std::size_t output_;
  std::vector<std::size_t> depths_;
};

/* ---------------------------------------------------------------------------
 * Fan-in-2 circuits: AND/OR of two signals, NOT of one
 * ------------------------------------------------------------------------- */

enum class fanin2_op : std::uint8_t
{
  and_op,
  or_op,
  not_op
};

struct fanin2_gate
{
  fanin2_op op = fanin2_op::and_op;
  signal a;
  signal b; ///< ignored for NOT
  friend bool operator==( const fanin2_gate&, const fanin2_gate& ) = default;
};

class fanin2_circuit
{
public:
  fanin2_circuit( unsigned arity, std::vector<fanin2_gate> gates, std::size_t output )
      : arity_( arity ), gates_( std::move( gates ) ), output_( output )
  {
    detail::check_output( output_, gates_.size() );
    for ( std::size_t g = 0; g < gates_.size(); ++g )
    {
      const auto& gate = gates_[g];
      detail::check_signal( gate.a, arity_, g );
      std::size_t depth = detail::signal_depth( gate.a, depths_ );
      if ( gate.op != fanin2_op::not_op )
      {
        detail::check_signal( gate.b, arity_, g );
        depth = std::max( depth, detail::signal_depth( gate.b, depths_ ) );
      }
      depths_.push_back( depth + 1u );
    }
  }

  unsigned arity() const noexcept { return arity_; }
  const std::vector<fanin2_gate>& gates() const noexcept { return gates_; }
  std::size_t output() const noexcept { return output_; }
  std::size_t gate_depth( std::size_t g ) const { return depths_.at( g ); }

  bool evaluate( domain_point x ) const
  {
    detail::check_point( x, arity_ );
    return ( evaluate_word( x & ~domain_point{ 63 } ) >> ( x & 63u ) ) & 1u;
  }

  std::uint64_t evaluate_word( domain_point base ) const
  {
    std::vector<std::uint64_t> values( output_ + 1u );
    auto read = [&]( const signal& s ) { return s.is_gate ? values[s.index] : detail::input_word( s.index, base ); };
    for ( std::size_t g = 0; g <= output_; ++g )
    {
      const auto& gate = gates_[g];
      switch ( gate.op )
      {
      case fanin2_op::and_op: values[g] = read( gate.a ) & read( gate.b ); break;
      case fanin2_op::or_op: values[g] = read( gate.a ) | read( gate.b ); break;
      case fanin2_op::not_op: values[g] = ~read( gate.a ); break;
      }
    }
    return values[output_];
  }

  size_depth size_and_depth() const noexcept { return { gates_.size(), depths_[output_] }; }

  /*! depth <= c * log2(n + 1) */
  bool within_log_depth( double c ) const noexcept
  {
    return static_cast<double>( depths_[output_] ) <= c * std::log2( static_cast<double>( arity_ ) + 1.0 );
  }

private:
  unsigned arity_;
  std::vector<fanin2_gate> gates_;
  std::size_t output_;
  std::vector<std::size_t> depths_;
};

using any_circuit = std::variant<threshold_circuit, ac0_circuit, fanin2_circuit>;

/* ---------------------------------------------------------------------------
 * Truth tables
 * ------------------------------------------------------------------------- */

inline truth_table compute_truth_table( const threshold_circuit& c )
{
  detail::check_table_arity( c.arity() );
  truth_table tt( c.arity() );
  std::vector<std::uint8_t> scratch( c.gates().size() );
  for ( domain_point x = 0; x < tt.num_bits(); ++x )
    if ( c.evaluate_into( x, scratch ) )
      tt.set_bit( x );
  return tt;
}

template<typename Circuit>
  requires std::is_same_v<Circuit, ac0_circuit> || std::is_same_v<Circuit, fanin2_circuit>
truth_table compute_truth_table( const Circuit& c )
{
  detail::check_table_arity( c.arity() );
  truth_table tt( c.arity() );
  auto words = tt.words();
  for ( std::size_t w = 0; w < words.size(); ++w )
    words[w] = c.evaluate_word( static_cast<domain_point>( w ) << 6 );
  words.back() &= tail_mask( c.arity() );
  return tt;
}

inline truth_table compute_truth_table( const any_circuit& c )
{
  return std::visit( []( const auto& circ ) { return compute_truth_table( circ ); }, c );
}

inline bool evaluate( const any_circuit& c, domain_point x )
{
  return std::visit( [x]( const auto& circ ) { return circ.evaluate( x ); }, c );
}

inline size_depth size_and_depth( const any_circuit& c )
{
  return std::visit( []( const auto& circ ) { return circ.size_and_depth(); }, c );
}

inline unsigned arity_of( const any_circuit& c )
{
  return std::visit( []( const auto& circ ) { return circ.arity(); }, c );
}

/* ---------------------------------------------------------------------------
 * Text format
 *
 *   circuit threshold <n>          circuit ac0 <n>          circuit fanin2 <n>
 *   thr x1:1 g0:-3 >= 1            and x1 !x2 g0            and x1 g0
 *   out g1                         or x3                    not g1
 *                                  out g1                   out g2
 *
 * One gate per line, gates numbered g0, g1, ... in file order. '#' starts a
 * comment.
 * ------------------------------------------------------------------------- */

namespace detail
{

inline signal parse_signal( std::string_view tok, std::size_t line_no )
{
  if ( tok.size() < 2 || ( tok[0] != 'x' && tok[0] != 'g' ) )
    fail( error_kind::parse, "line " + std::to_string( line_no ) + ": expected signal like x3 or g0, got '" + std::string( tok ) + "'" );
  std::uint64_t v = 0;
  for ( auto c : tok.substr( 1 ) )
  {
    if ( c < '0' || c > '9' )
      fail( error_kind::parse, "line " + std::to_string( line_no ) + ": bad signal '" + std::string( tok ) + "'" );
    v = v * 10u + static_cast<std::uint64_t>( c - '0' );
    if ( v > 0xffffffffull )
      fail( error_kind::parse, "line " + std::to_string( line_no ) + ": signal index too large" );
  }
  return tok[0] == 'x' ? signal::input( static_cast<unsigned>( v ) ) : signal::gate( v );
}

inline std::int64_t parse_int( std::string_view tok, std::size_t line_no )
{
  try
  {
    std::size_t used = 0;
    const auto v = std::stoll( std::string( tok ), &used );
    if ( used != tok.size() )
      throw std::invalid_argument( "trailing" );
    return v;
  }
  catch ( const std::exception& )
  {
    fail( error_kind::parse, "line " + std::to_string( line_no ) + ": bad integer '" + std::string( tok ) + "'" );
  }
}

inline std::vector<std::string> split_ws( const std::string& line )
{
  std::istringstream is( line );
  std::vector<std::string> out;
  for ( std::string tok; is >> tok; )
    out.push_back( tok );
  return out;
}

} // namespace detail

inline std::string write_circuit( const threshold_circuit& c )
{
  std::ostringstream os;
  os << "circuit threshold " << c.arity() << "\n";
  for ( const auto& g : c.gates() )
  {
    os << "thr";
    for ( const auto& in : g.inputs )
      os << ' ' << to_string( in.source ) << ':' << in.weight;
    os << " >= " << g.threshold << "\n";
  }
  os << "out g" << c.output() << "\n";
  return os.str();
}

inline std::string write_circuit( const ac0_circuit& c )
{
  std::ostringstream os;
  os << "circuit ac0 " << c.arity() << "\n";
  for ( const auto& g : c.gates() )
  {
    os << ( g.op == ac0_op::and_op ? "and" : "or" );
    for ( const auto& l : g.fanins )
      os << ' ' << ( l.negated ? "!" : "" ) << to_string( l.source );
    os << "\n";
  }
  os << "out g" << c.output() << "\n";
  return os.str();
}

inline std::string write_circuit( const fanin2_circuit& c )
{
  std::ostringstream os;
  os << "circuit fanin2 " << c.arity() << "\n";
  for ( const auto& g : c.gates() )
  {
    switch ( g.op )
    {
    case fanin2_op::and_op: os << "and " << to_string( g.a ) << ' ' << to_string( g.b ); break;
    case fanin2_op::or_op: os << "or " << to_string( g.a ) << ' ' << to_string( g.b ); break;
    case fanin2_op::not_op: os << "not " << to_string( g.a ); break;
    }
    os << "\n";
  }
  os << "out g" << c.output() << "\n";
  return os.str();
}

inline std::string write_circuit( const any_circuit& c )
{
  return std::visit( []( const auto& circ ) { return write_circuit( circ ); }, c );
}

inline any_circuit read_circuit( std::string_view text )
{
  std::istringstream is{ std::string( text ) };
  std::string dialect;
  unsigned arity = 0;
  bool have_header = false;
  std::optional<std::size_t> output;
  std::vector<threshold_gate> thr;
  std::vector<ac0_gate> ac0;
  std::vector<fanin2_gate> f2;

  std::size_t line_no = 0;
  for ( std::string line; std::getline( is, line ); )
  {
    ++line_no;
    if ( auto hash = line.find( '#' ); hash != std::string::npos )
      line.erase( hash );
    const auto toks = detail::split_ws( line );
    if ( toks.empty() )
      continue;
    const auto where = "line " + std::to_string( line_no ) + ": ";
    if ( !have_header )
    {
      if ( toks.size() != 3 || toks[0] != "circuit" )
        fail( error_kind::parse, where + "expected 'circuit <dialect> <arity>'" );
      dialect = toks[1];
      if ( dialect != "threshold" && dialect != "ac0" && dialect != "fanin2" )
        fail( error_kind::parse, where + "unknown dialect '" + dialect + "'" );
      const auto a = detail::parse_int( toks[2], line_no );
      if ( a < 0 || a > 63 )
        fail( error_kind::parse, where + "arity out of range" );
      arity = static_cast<unsigned>( a );
      have_header = true;
      continue;
    }
    if ( output )
      fail( error_kind::parse, where + "content after 'out' line" );
    if ( toks[0] == "out" )
    {
      if ( toks.size() != 2 )
        fail( error_kind::parse, where + "expected 'out g<k>'" );
      const auto s = detail::parse_signal( toks[1], line_no );
      if ( !s.is_gate )
        fail( error_kind::parse, where + "output must be a gate" );
      output = s.index;
      continue;
    }
    if ( dialect == "threshold" )
    {
      if ( toks[0] != "thr" || toks.size() < 3 || toks[toks.size() - 2] != ">=" )
        fail( error_kind::parse, where + "expected 'thr <sig>:<w> ... >= <theta>'" );
      threshold_gate g;
      for ( std::size_t k = 1; k + 2 < toks.size(); ++k )
      {
        const auto colon = toks[k].find( ':' );
        if ( colon == std::string::npos )
          fail( error_kind::parse, where + "weighted input must be <sig>:<w>" );
        g.inputs.push_back( { detail::parse_signal( std::string_view( toks[k] ).substr( 0, colon ), line_no ),
                              detail::parse_int( std::string_view( toks[k] ).substr( colon + 1 ), line_no ) } );
      }
      g.threshold = detail::parse_int( toks.back(), line_no );
      thr.push_back( std::move( g ) );
    }
    else if ( dialect == "ac0" )
    {
      ac0_gate g;
      if ( toks[0] == "and" )
        g.op = ac0_op::and_op;
      else if ( toks[0] == "or" )
        g.op = ac0_op::or_op;
      else
        fail( error_kind::parse, where + "expected 'and' or 'or'" );
      for ( std::size_t k = 1; k < toks.size(); ++k )
      {
        std::string_view tok = toks[k];
        const bool neg = !tok.empty() && tok[0] == '!';
        g.fanins.push_back( { detail::parse_signal( neg ? tok.substr( 1 ) : tok, line_no ), neg } );
      }
      ac0.push_back( std::move( g ) );
    }
    else
    {
      fanin2_gate g;
      if ( toks[0] == "not" )
      {
        if ( toks.size() != 2 )
          fail( error_kind::parse, where + "NOT takes exactly one fan-in" );
        g.op = fanin2_op::not_op;
        g.a = detail::parse_signal( toks[1], line_no );
      }
      else if ( toks[0] == "and" || toks[0] == "or" )
      {
        if ( toks.size() != 3 )
          fail( error_kind::parse, where + "AND/OR take exactly two fan-ins" );
        g.op = toks[0] == "and" ? fanin2_op::and_op : fanin2_op::or_op;
        g.a = detail::parse_signal( toks[1], line_no );
        g.b = detail::parse_signal( toks[2], line_no );
      }
      else
        fail( error_kind::parse, where + "expected 'and', 'or' or 'not'" );
      f2.push_back( g );
    }
  }
  if ( !have_header )
    fail( error_kind::parse, "missing 'circuit' header" );
  if ( !output )
    fail( error_kind::parse, "missing 'out' line" );
  if ( dialect == "threshold" )
    return threshold_circuit( arity, std::move( thr ), *output );
  if ( dialect == "ac0" )
    return ac0_circuit( arity, std::move( ac0 ), *output );
  return fanin2_circuit( arity, std::move( f2 ), *output );
}

} // namespace certlab
