#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace certlab
{

/*! \brief The p-bit saturating datatype D_p and its rounding map tau_p.

  Binary floating format with 1 sign bit, `exp_bits` exponent bits (bias
  2^(e-1) - 1) and `man_bits` mantissa bits; exponent field 0 holds
  subnormals. There are no infinities or NaNs: every exponent code is finite,
  so F_p^max = (2 - 2^-m) 2^(2^e - 1 - bias), which is 480 for (4, 3).

  Values are carried as doubles that are exact members of D_p. Each
  operation computes the exact double result (exact for sums and products at
  these widths; quotients and roots are rounded from values that cannot sit
  on a D_p midpoint) and applies tau_p: round to nearest, ties to the even
  code, saturate to +-F_p^max, and map -0 to +0. Division by zero saturates
  with the sign of the dividend (0 / 0 = 0).
*/
class fixed_precision
{
public:
  static constexpr unsigned min_exp_bits = 2, max_exp_bits = 5;
  static constexpr unsigned min_man_bits = 1, max_man_bits = 10;

  explicit fixed_precision( unsigned exp_bits = 4, unsigned man_bits = 3 )
      : exp_bits_( exp_bits ), man_bits_( man_bits )
  {
    if ( exp_bits < min_exp_bits || exp_bits > max_exp_bits || man_bits < min_man_bits || man_bits > max_man_bits )
      fail( error_kind::precision, "unsupported format: exponent bits in [2, 5], mantissa bits in [1, 10]" );
    const int bias = this->bias();
    const std::uint32_t codes = std::uint32_t{ 1 } << ( exp_bits + man_bits );
    values_.reserve( codes );
    for ( std::uint32_t c = 0; c < codes; ++c )
    {
      const auto ef = c >> man_bits;
      const auto mant = c & ( ( 1u << man_bits ) - 1u );
      const double frac = std::ldexp( static_cast<double>( mant ), -static_cast<int>( man_bits ) );
      values_.push_back( ef == 0u ? std::ldexp( frac, 1 - bias ) : std::ldexp( 1.0 + frac, static_cast<int>( ef ) - bias ) );
    }
  }

  unsigned exp_bits() const noexcept { return exp_bits_; }
  unsigned man_bits() const noexcept { return man_bits_; }
  unsigned precision() const noexcept { return 1u + exp_bits_ + man_bits_; }
  int bias() const noexcept { return ( 1 << ( exp_bits_ - 1u ) ) - 1; }
  double max_value() const noexcept { return values_.back(); }

  bool operator==( const fixed_precision& o ) const noexcept { return exp_bits_ == o.exp_bits_ && man_bits_ == o.man_bits_; }

  /*! tau_p. */
  double round( double x ) const
  {
    if ( std::isnan( x ) )
      fail( error_kind::precision, "NaN has no D_p representation" );
    const bool neg = x < 0.0;
    const double a = std::fabs( x );
    double r;
    if ( a >= max_value() )
      r = max_value();
    else
    {
      const auto hi = static_cast<std::size_t>( std::lower_bound( values_.begin(), values_.end(), a ) - values_.begin() );
      if ( values_[hi] == a )
        r = a;
      else
      {
        const double lo = values_[hi - 1u], up = values_[hi];
        const double mid = 0.5 * ( lo + up );
        if ( a < mid )
          r = lo;
        else if ( a > mid )
          r = up;
        else
          r = ( hi % 2u == 0u ) ? up : lo;
      }
    }
    if ( r == 0.0 )
      return 0.0;
    return neg ? -r : r;
  }

  bool representable( double x ) const
  {
    return !std::isnan( x ) && std::fabs( x ) <= max_value() && round( x ) == x;
  }

  /*! Throws a precision error unless x is an element of D_p. */
  double require( double x, const std::string& what ) const
  {
    if ( !representable( x ) )
      fail( error_kind::precision, what + " is not representable in D_" + std::to_string( precision() ) );
    return x == 0.0 ? 0.0 : x;
  }

  double add( double a, double b ) const { return round( a + b ); }
  double sub( double a, double b ) const { return round( a - b ); }
  double mul( double a, double b ) const { return round( a * b ); }
  double div( double a, double b ) const
  {
    if ( b == 0.0 )
      return a == 0.0 ? 0.0 : ( a < 0.0 ? -max_value() : max_value() );
    return round( a / b );
  }
  double relu( double a ) const noexcept { return a > 0.0 ? a : 0.0; }

  /*! Correctly rounded square root, found by comparing squares of
      neighboring D_p values against the argument. */
  double sqrt( double a ) const
  {
    if ( a < 0.0 )
      fail( error_kind::precision, "square root of a negative value" );
    if ( a == 0.0 )
      return 0.0;
    auto it = std::partition_point( values_.begin(), values_.end(), [a]( double v ) { return v * v <= a; } );
    if ( it == values_.end() )
      return max_value();
    const double up = *it;
    const double lo = *( it - 1 );
    if ( lo * lo == a )
      return lo;
    const double mid = 0.5 * ( lo + up );
    const double m2 = mid * mid;
    if ( a < m2 )
      return lo;
    if ( a > m2 )
      return up;
    return ( static_cast<std::size_t>( it - values_.begin() ) % 2u == 0u ) ? up : lo;
  }

  /*! Left-to-right sum: acc = tau(acc + term), starting from the first term. */
  double sum( std::span<const double> terms ) const
  {
    double acc = 0.0;
    for ( std::size_t k = 0; k < terms.size(); ++k )
      acc = k == 0u ? terms[0] : add( acc, terms[k] );
    return acc;
  }

  /*! tau(... tau(tau(w0 x0) + tau(w1 x1)) ... + bias), with the bias last. */
  double affine( std::span<const double> w, std::span<const double> x, double bias ) const
  {
    if ( w.size() != x.size() )
      fail( error_kind::arity_mismatch, "affine row and input differ in length" );
    double acc = 0.0;
    for ( std::size_t k = 0; k < w.size(); ++k )
    {
      const double t = mul( w[k], x[k] );
      acc = k == 0u ? t : add( acc, t );
    }
    return add( acc, bias );
  }

  /*! \brief Bit pattern: sign << (p - 1) | exponent field << m | mantissa. */
  std::uint32_t encode( double x ) const
  {
    require( x, "value" );
    const double a = std::fabs( x );
    const auto code = static_cast<std::uint32_t>( std::lower_bound( values_.begin(), values_.end(), a ) - values_.begin() );
    return ( x < 0.0 ? std::uint32_t{ 1 } << ( precision() - 1u ) : 0u ) | code;
  }

  double decode( std::uint32_t bits ) const
  {
    if ( bits >> precision() )
      fail( error_kind::parse, "bit pattern wider than the format" );
    const auto code = bits & ( ( std::uint32_t{ 1 } << ( precision() - 1u ) ) - 1u );
    const double v = values_[code];
    return ( bits >> ( precision() - 1u ) ) != 0u && v != 0.0 ? -v : v;
  }

  std::string to_hex( double x ) const
  {
    static const char* digits = "0123456789abcdef";
    const auto bits = encode( x );
    const unsigned width = ( precision() + 3u ) / 4u;
    std::string s = "0x";
    for ( unsigned k = width; k-- > 0u; )
      s.push_back( digits[( bits >> ( 4u * k ) ) & 0xfu] );
    return s;
  }

  double from_hex( const std::string& s ) const
  {
    if ( s.size() < 3u || s[0] != '0' || ( s[1] != 'x' && s[1] != 'X' ) || s.size() > 10u )
      fail( error_kind::parse, "malformed scalar '" + s + "'" );
    std::uint32_t bits = 0;
    for ( std::size_t i = 2; i < s.size(); ++i )
    {
      const char c = s[i];
      unsigned d;
      if ( c >= '0' && c <= '9' )
        d = static_cast<unsigned>( c - '0' );
      else if ( c >= 'a' && c <= 'f' )
        d = static_cast<unsigned>( c - 'a' + 10 );
      else if ( c >= 'A' && c <= 'F' )
        d = static_cast<unsigned>( c - 'A' + 10 );
      else
        fail( error_kind::parse, "malformed scalar '" + s + "'" );
      bits = ( bits << 4u ) | d;
    }
    return decode( bits );
  }

  /*! Nonnegative members of D_p in increasing order. */
  const std::vector<double>& nonnegative_values() const noexcept { return values_; }

private:
  unsigned exp_bits_;
  unsigned man_bits_;
  std::vector<double> values_;
};

/*! The shipped minimum format, p_0 = 8. */
inline fixed_precision minimum_precision()
{
  return fixed_precision( 4, 3 );
}

/*! \brief Layer norm (x - mean) / ||x - mean||_2 inside D_p.

  Order: s = left-to-right sum of x; mean = tau(s / k); c_j = tau(x_j -
  mean); q = left-to-right sum of tau(c_j c_j); r = sqrt(q); y_j = tau(c_j /
  r). A zero centered vector (r = 0) maps to the zero vector.
*/
inline std::vector<double> layer_norm( const fixed_precision& fp, std::span<const double> x )
{
  if ( x.empty() )
    return {};
  const double mean = fp.div( fp.sum( x ), fp.round( static_cast<double>( x.size() ) ) );
  std::vector<double> c( x.size() ), sq( x.size() );
  for ( std::size_t j = 0; j < x.size(); ++j )
  {
    c[j] = fp.sub( x[j], mean );
    sq[j] = fp.mul( c[j], c[j] );
  }
  const double r = fp.sqrt( fp.sum( sq ) );
  if ( r == 0.0 )
    return std::vector<double>( x.size(), 0.0 );
  for ( auto& v : c )
    v = fp.div( v, r );
  return c;
}

} // namespace certlab
