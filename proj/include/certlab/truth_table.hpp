#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace certlab
{

/*! Index of a point in {0,1}^n.

  Input coordinate i (1-based) is bit i-1 of the index, so coordinate 1 is
  the least significant bit. Every module uses this convention.
*/
using domain_point = std::uint64_t;

/*! Largest arity a dense table may have (2^30 bits = 128 MiB). */
inline constexpr unsigned max_table_arity = 30u;

inline constexpr std::size_t words_for_arity( unsigned arity )
{
  return arity >= 6u ? ( std::size_t{ 1 } << ( arity - 6u ) ) : 1u;
}

inline constexpr std::uint64_t tail_mask( unsigned arity )
{
  return arity >= 6u ? ~std::uint64_t{ 0 } : ( ( std::uint64_t{ 1 } << ( 1u << arity ) ) - 1u );
}

/*! \brief Dense truth table of a Boolean function on {0,1}^n. */
class truth_table
{
public:
  truth_table() = default;

  explicit truth_table( unsigned arity )
      : arity_( arity )
  {
    if ( arity > max_table_arity )
    {
      fail( error_kind::resource_budget, "truth table arity " + std::to_string( arity ) + " exceeds limit " + std::to_string( max_table_arity ) );
    }
    words_.assign( words_for_arity( arity ), 0u );
  }

  truth_table( unsigned arity, std::vector<std::uint64_t> words )
      : arity_( arity ), words_( std::move( words ) )
  {
    if ( arity > max_table_arity || words_.size() != words_for_arity( arity ) )
    {
      fail( error_kind::invalid_argument, "word count does not match arity" );
    }
    words_.back() &= tail_mask( arity_ );
  }

  template<typename Fn>
  static truth_table from_function( unsigned arity, Fn&& fn )
  {
    truth_table tt( arity );
    for ( domain_point x = 0; x < tt.num_bits(); ++x )
    {
      if ( fn( x ) )
      {
        tt.set_bit( x );
      }
    }
    return tt;
  }

  static truth_table constant( unsigned arity, bool value )
  {
    truth_table tt( arity );
    if ( value )
    {
      std::fill( tt.words_.begin(), tt.words_.end(), ~std::uint64_t{ 0 } );
      tt.words_.back() &= tail_mask( arity );
    }
    return tt;
  }

  /*! OR of all inputs. */
  static truth_table or_n( unsigned arity )
  {
    auto tt = constant( arity, true );
    tt.clear_bit( 0 );
    return tt;
  }

  unsigned arity() const noexcept { return arity_; }
  std::uint64_t num_bits() const noexcept { return std::uint64_t{ 1 } << arity_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  bool bit( domain_point x ) const
  {
    check_point( x );
    return ( words_[x >> 6] >> ( x & 63u ) ) & 1u;
  }

  void set_bit( domain_point x, bool value = true )
  {
    check_point( x );
    if ( value )
      words_[x >> 6] |= std::uint64_t{ 1 } << ( x & 63u );
    else
      words_[x >> 6] &= ~( std::uint64_t{ 1 } << ( x & 63u ) );
  }

  void clear_bit( domain_point x ) { set_bit( x, false ); }

  std::uint64_t count_ones() const noexcept
  {
    std::uint64_t total = 0;
    for ( auto w : words_ )
      total += static_cast<std::uint64_t>( std::popcount( w ) );
    return total;
  }

  bool is_zero() const noexcept
  {
    return std::all_of( words_.begin(), words_.end(), []( auto w ) { return w == 0u; } );
  }

  truth_table operator~() const
  {
    truth_table r = *this;
    for ( auto& w : r.words_ )
      w = ~w;
    r.words_.back() &= tail_mask( arity_ );
    return r;
  }

  truth_table& operator&=( const truth_table& o ) { return combine( o, []( auto a, auto b ) { return a & b; } ); }
  truth_table& operator|=( const truth_table& o ) { return combine( o, []( auto a, auto b ) { return a | b; } ); }
  truth_table& operator^=( const truth_table& o ) { return combine( o, []( auto a, auto b ) { return a ^ b; } ); }

  friend truth_table operator&( truth_table a, const truth_table& b ) { return a &= b; }
  friend truth_table operator|( truth_table a, const truth_table& b ) { return a |= b; }
  friend truth_table operator^( truth_table a, const truth_table& b ) { return a ^= b; }

  friend bool operator==( const truth_table& a, const truth_table& b ) noexcept
  {
    return a.arity_ == b.arity_ && a.words_ == b.words_;
  }

  /*! Points set to 1, in increasing order. */
  std::vector<domain_point> ones() const
  {
    std::vector<domain_point> out;
    for ( std::size_t i = 0; i < words_.size(); ++i )
    {
      auto w = words_[i];
      while ( w )
      {
        out.push_back( ( static_cast<domain_point>( i ) << 6 ) + static_cast<unsigned>( std::countr_zero( w ) ) );
        w &= w - 1u;
      }
    }
    return out;
  }

  std::size_t hash() const noexcept
  {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ arity_;
    for ( auto w : words_ )
    {
      h ^= w + 0x9e3779b97f4a7c15ull + ( h << 6 ) + ( h >> 2 );
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>( h ^ ( h >> 33 ) );
  }

  /*! Hex serialization `<arity>:<digits>`.

    Digits are written least-significant input first: digit j holds inputs
    4j..4j+3, with input 4j in the digit's lowest bit. OR_2 is "2:e".
  */
  std::string to_hex() const
  {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = std::to_string( arity_ ) + ":";
    const std::uint64_t ndigits = arity_ >= 2u ? ( num_bits() >> 2 ) : 1u;
    out.reserve( out.size() + ndigits );
    for ( std::uint64_t j = 0; j < ndigits; ++j )
    {
      const auto bitpos = j * 4u;
      const auto nibble = ( words_[bitpos >> 6] >> ( bitpos & 63u ) ) & 0xfu;
      out.push_back( digits[nibble] );
    }
    return out;
  }

  static truth_table from_hex( std::string_view text )
  {
    const auto colon = text.find( ':' );
    if ( colon == std::string_view::npos || colon == 0 )
    {
      fail( error_kind::parse, "truth table hex must look like '<arity>:<digits>'" );
    }
    unsigned arity = 0;
    for ( auto c : text.substr( 0, colon ) )
    {
      if ( c < '0' || c > '9' )
        fail( error_kind::parse, "bad arity in truth table hex" );
      arity = arity * 10u + static_cast<unsigned>( c - '0' );
      if ( arity > max_table_arity )
        fail( error_kind::parse, "truth table arity too large" );
    }
    truth_table tt( arity );
    const auto body = text.substr( colon + 1 );
    const std::uint64_t ndigits = arity >= 2u ? ( tt.num_bits() >> 2 ) : 1u;
    if ( body.size() != ndigits )
    {
      fail( error_kind::parse, "expected " + std::to_string( ndigits ) + " hex digits for arity " + std::to_string( arity ) );
    }
    for ( std::uint64_t j = 0; j < ndigits; ++j )
    {
      const char c = body[j];
      std::uint64_t v;
      if ( c >= '0' && c <= '9' )
        v = static_cast<std::uint64_t>( c - '0' );
      else if ( c >= 'a' && c <= 'f' )
        v = static_cast<std::uint64_t>( c - 'a' + 10 );
      else if ( c >= 'A' && c <= 'F' )
        v = static_cast<std::uint64_t>( c - 'A' + 10 );
      else
        fail( error_kind::parse, std::string( "bad hex digit '" ) + c + "'" );
      const auto bitpos = j * 4u;
      tt.words_[bitpos >> 6] |= v << ( bitpos & 63u );
    }
    if ( ( tt.words_.back() & ~tail_mask( arity ) ) != 0u )
    {
      fail( error_kind::parse, "hex digits set bits beyond 2^arity" );
    }
    return tt;
  }

private:
  void check_point( domain_point x ) const
  {
    if ( x >= num_bits() )
    {
      fail( error_kind::invalid_argument, "domain point " + std::to_string( x ) + " outside {0,1}^" + std::to_string( arity_ ) );
    }
  }

  template<typename Op>
  truth_table& combine( const truth_table& o, Op op )
  {
    if ( o.arity_ != arity_ )
      fail( error_kind::arity_mismatch, "truth tables have different arities" );
    for ( std::size_t i = 0; i < words_.size(); ++i )
      words_[i] = op( words_[i], o.words_[i] );
    return *this;
  }

  unsigned arity_ = 0;
  std::vector<std::uint64_t> words_ = std::vector<std::uint64_t>( 1, 0u );
};

struct truth_table_hash
{
  std::size_t operator()( const truth_table& tt ) const noexcept { return tt.hash(); }
};

/*! Value of input coordinate `coord` (1-based) at point x. */
inline bool coordinate( domain_point x, unsigned coord ) noexcept
{
  return ( x >> ( coord - 1u ) ) & 1u;
}

/*! Point with exactly coordinate `coord` set (the one-hot vector e_coord). */
inline domain_point unit_point( unsigned coord ) noexcept
{
  return domain_point{ 1 } << ( coord - 1u );
}

} // namespace certlab

template<>
struct std::hash<certlab::truth_table>
{
  std::size_t operator()( const certlab::truth_table& tt ) const noexcept { return tt.hash(); }
};
