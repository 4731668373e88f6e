#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "truth_table.hpp"

namespace certlab
{

using big_int = boost::multiprecision::cpp_int;
using big_rational = boost::multiprecision::cpp_rational;
using hp_real = boost::multiprecision::cpp_bin_float_100;

/* ---------------------------------------------------------------------------
 * Survival probability
 * ------------------------------------------------------------------------- */

struct survival_options
{
  /*! Largest number of product terms evaluated as an exact rational. */
  std::uint64_t exact_term_limit = 4096;
  bool force_log_space = false;
  unsigned jobs = 1;
};

/*! \brief Probability value with an optional exact form.

  `value` always holds a 100-digit rendering; `exact` is set when the
  rational path was taken.
*/
struct survival_value
{
  std::optional<big_rational> exact;
  hp_real value;

  bool is_exact() const noexcept { return exact.has_value(); }
  double to_double() const { return static_cast<double>( value ); }
};

namespace detail
{

inline survival_value exact_value( big_rational r )
{
  survival_value v;
  v.value = hp_real( r );
  v.exact = std::move( r );
  return v;
}

inline void check_nonnegative( const big_int& v, const char* what )
{
  if ( v < 0 )
    fail( error_kind::invalid_argument, std::string( what ) + " must be nonnegative" );
}

} // namespace detail

/*! \brief Probability that m points drawn uniformly without replacement from
    a population of q miss a fixed subset of e points.

  Equals binom(q - e, m) / binom(q, m). The exact path multiplies the
  min(m, e) factors of the symmetric product; past the term limit the value
  comes from log-gamma differences in 100-digit arithmetic.
*/
inline survival_value survival_probability( const big_int& q, const big_int& e, const big_int& m, const survival_options& opt = {} )
{
  detail::check_nonnegative( q, "population size" );
  detail::check_nonnegative( e, "error count" );
  detail::check_nonnegative( m, "sample size" );
  if ( m > q )
    fail( error_kind::invalid_argument, "sample size exceeds the population" );
  if ( e > q )
    fail( error_kind::invalid_argument, "error count exceeds the population" );
  if ( e == 0 || m == 0 )
    return detail::exact_value( big_rational( 1 ) );
  if ( e > q - m )
    return detail::exact_value( big_rational( 0 ) );

  const big_int& k = m < e ? m : e;
  const big_int& other = m < e ? e : m;
  if ( !opt.force_log_space && k <= opt.exact_term_limit )
  {
    big_int num = 1, den = 1;
    const auto terms = static_cast<std::uint64_t>( k );
    for ( std::uint64_t i = 0; i < terms; ++i )
    {
      num *= q - other - i;
      den *= q - i;
    }
    return detail::exact_value( big_rational( num, den ) );
  }

  using boost::math::lgamma;
  const hp_real qq( q ), ee( e ), mm( m );
  const hp_real one = 1;
  const hp_real lp = lgamma( qq - ee + one ) - lgamma( qq - ee - mm + one ) - lgamma( qq + one ) + lgamma( qq - mm + one );
  survival_value v;
  v.value = lp >= 0 ? one : hp_real( exp( lp ) );
  return v;
}

inline survival_value survival_probability( std::uint64_t q, std::uint64_t e, std::uint64_t m, const survival_options& opt = {} )
{
  return survival_probability( big_int( q ), big_int( e ), big_int( m ), opt );
}

/* ---------------------------------------------------------------------------
 * Error profiles
 * ------------------------------------------------------------------------- */

struct error_entry
{
  std::string id;
  big_int error_count;
  /*! Sorted distinct error points, when known. */
  std::optional<std::vector<domain_point>> points;
};

struct error_profile
{
  big_int population;
  std::string domain;
  std::vector<error_entry> entries;

  bool has_explicit_sets() const
  {
    return std::all_of( entries.begin(), entries.end(), []( const auto& h ) { return h.points.has_value(); } );
  }

  void validate() const
  {
    detail::check_nonnegative( population, "population size" );
    for ( const auto& h : entries )
    {
      if ( h.error_count < 0 || h.error_count > population )
        fail( error_kind::invalid_argument, "error count of " + h.id + " is outside [0, |Q|]" );
      if ( h.points )
      {
        if ( h.error_count != h.points->size() )
          fail( error_kind::invalid_argument, "error count of " + h.id + " does not match its point list" );
        if ( !std::is_sorted( h.points->begin(), h.points->end() ) || std::adjacent_find( h.points->begin(), h.points->end() ) != h.points->end() )
          fail( error_kind::invalid_argument, "point list of " + h.id + " is not sorted and distinct" );
      }
    }
  }
};

/*! \brief Adds an entry with an explicit error set (sorted and deduplicated). */
inline void add_explicit_entry( error_profile& p, std::string id, std::vector<domain_point> points )
{
  std::sort( points.begin(), points.end() );
  points.erase( std::unique( points.begin(), points.end() ), points.end() );
  error_entry h;
  h.id = std::move( id );
  h.error_count = points.size();
  h.points = std::move( points );
  p.entries.push_back( std::move( h ) );
}

/*! \brief Reads the text profile format.

      # comment
      population <|Q|>
      domain <free text>        (optional)
      <id> <error count> [<point> ...]

  Points are decimal domain encodings; when present their number must match
  the error count.
*/
inline error_profile read_error_profile( std::istream& in )
{
  error_profile p;
  bool have_population = false;
  std::string line;
  std::size_t line_no = 0;
  auto parse_error = [&]( const std::string& msg ) { fail( error_kind::parse, "line " + std::to_string( line_no ) + ": " + msg ); };
  auto parse_big = [&]( const std::string& tok ) {
    if ( tok.empty() || !std::all_of( tok.begin(), tok.end(), []( char c ) { return c >= '0' && c <= '9'; } ) )
      parse_error( "expected a nonnegative integer, got '" + tok + "'" );
    return big_int( tok );
  };
  while ( std::getline( in, line ) )
  {
    ++line_no;
    if ( const auto hash = line.find( '#' ); hash != std::string::npos )
      line.erase( hash );
    std::istringstream ls( line );
    std::string head;
    if ( !( ls >> head ) )
      continue;
    if ( head == "population" )
    {
      std::string tok;
      if ( !( ls >> tok ) )
        parse_error( "population needs a value" );
      p.population = parse_big( tok );
      have_population = true;
      continue;
    }
    if ( head == "domain" )
    {
      std::getline( ls >> std::ws, p.domain );
      continue;
    }
    if ( !have_population )
      parse_error( "entry before the population header" );
    error_entry h;
    h.id = head;
    std::string tok;
    if ( !( ls >> tok ) )
      parse_error( "entry " + head + " has no error count" );
    h.error_count = parse_big( tok );
    std::vector<domain_point> pts;
    while ( ls >> tok )
    {
      const auto v = parse_big( tok );
      if ( v > std::numeric_limits<domain_point>::max() )
        parse_error( "point " + tok + " does not fit a 64-bit encoding" );
      pts.push_back( static_cast<domain_point>( v ) );
    }
    if ( !pts.empty() )
    {
      std::sort( pts.begin(), pts.end() );
      if ( std::adjacent_find( pts.begin(), pts.end() ) != pts.end() )
        parse_error( "entry " + head + " repeats a point" );
      h.points = std::move( pts );
    }
    else if ( h.error_count == 0 )
      h.points = std::vector<domain_point>{};
    p.entries.push_back( std::move( h ) );
  }
  if ( !have_population )
    fail( error_kind::parse, "missing population header" );
  p.validate();
  return p;
}

inline void write_error_profile( std::ostream& os, const error_profile& p )
{
  os << "population " << p.population << '\n';
  if ( !p.domain.empty() )
    os << "domain " << p.domain << '\n';
  for ( const auto& h : p.entries )
  {
    os << h.id << ' ' << h.error_count;
    if ( h.points )
      for ( auto x : *h.points )
        os << ' ' << x;
    os << '\n';
  }
}

/* ---------------------------------------------------------------------------
 * Expected survivors
 * ------------------------------------------------------------------------- */

struct survivor_expectation
{
  std::optional<big_rational> exact;
  hp_real value;

  double to_double() const { return static_cast<double>( value ); }
};

namespace detail
{

/*! Pairwise sum over [lo, hi) with a fixed split, so the result does not
    depend on how the terms were produced. */
template<typename T>
T tree_sum( const std::vector<T>& v, std::size_t lo, std::size_t hi )
{
  if ( hi - lo == 1u )
    return v[lo];
  const auto mid = lo + ( hi - lo ) / 2u;
  return tree_sum( v, lo, mid ) + tree_sum( v, mid, hi );
}

} // namespace detail

/*! \brief Sum of the per-hypothesis survival probabilities at sample size m.

  Entries with the same error count share one probability evaluation; the
  distinct evaluations run on up to `opt.jobs` threads.
*/
inline survivor_expectation expected_survivors( const error_profile& p, const big_int& m, const survival_options& opt = {} )
{
  p.validate();
  if ( m < 0 || m > p.population )
    fail( error_kind::invalid_argument, "sample size must be in [0, |Q|]" );
  survivor_expectation out;
  if ( p.entries.empty() )
  {
    out.exact = big_rational( 0 );
    return out;
  }

  std::map<big_int, std::size_t> slot;
  for ( const auto& h : p.entries )
    slot.emplace( h.error_count, 0 );
  std::vector<big_int> counts;
  for ( auto& [c, s] : slot )
  {
    s = counts.size();
    counts.push_back( c );
  }

  std::vector<survival_value> probs( counts.size() );
  const auto jobs = std::max<std::size_t>( 1, std::min<std::size_t>( opt.jobs, counts.size() ) );
  auto work = [&]( std::size_t w ) {
    for ( std::size_t i = w; i < counts.size(); i += jobs )
      probs[i] = survival_probability( p.population, counts[i], m, opt );
  };
  if ( jobs == 1u )
    work( 0 );
  else
  {
    std::vector<std::jthread> pool;
    for ( std::size_t w = 0; w < jobs; ++w )
      pool.emplace_back( work, w );
  }

  const bool all_exact = std::all_of( probs.begin(), probs.end(), []( const auto& v ) { return v.is_exact(); } );
  std::vector<hp_real> terms;
  std::vector<big_rational> exact_terms;
  terms.reserve( p.entries.size() );
  for ( const auto& h : p.entries )
  {
    const auto& v = probs[slot.at( h.error_count )];
    terms.push_back( v.value );
    if ( all_exact )
      exact_terms.push_back( *v.exact );
  }
  out.value = detail::tree_sum( terms, 0, terms.size() );
  if ( all_exact )
    out.exact = detail::tree_sum( exact_terms, 0, exact_terms.size() );
  return out;
}

/* ---------------------------------------------------------------------------
 * Constructed addition family
 * ------------------------------------------------------------------------- */

inline big_int addition_population( unsigned n )
{
  return big_int( 1 ) << ( 3u * n + 1u );
}

/*! e_n = 2^n (2^(n+1) - 1). */
inline big_int addition_error_count( unsigned n )
{
  return ( big_int( 1 ) << n ) * ( ( big_int( 1 ) << ( n + 1u ) ) - 1 );
}

/*! 2^n p_n(m): expected survivors of the 2^n addition deceivers. */
inline hp_real constructed_addition_expected_survivors( unsigned n, const big_int& m, const survival_options& opt = {} )
{
  if ( n < 1u )
    fail( error_kind::invalid_argument, "operand length must be at least 1" );
  const auto p = survival_probability( addition_population( n ), addition_error_count( n ), m, opt );
  return hp_real( big_int( 1 ) << n ) * p.value;
}

/*! \brief Profile of the 2^n addition deceivers, entry k for pattern k.

  With `explicit_sets`, E_k = {(k, b, z) : z != k + b} is listed point by
  point using the layout a | b << n | z << 2n.
*/
inline error_profile constructed_addition_profile( unsigned n, bool explicit_sets )
{
  if ( n < 1u || n > 20u || ( explicit_sets && n > 6u ) )
    fail( error_kind::resource_budget, "constructed addition profile is limited to n <= 20 (n <= 6 with explicit sets)" );
  error_profile p;
  p.population = addition_population( n );
  p.domain = "addition " + std::to_string( n );
  const std::uint64_t count = std::uint64_t{ 1 } << n;
  for ( std::uint64_t a = 0; a < count; ++a )
  {
    const auto id = "pi" + std::to_string( a );
    if ( !explicit_sets )
    {
      p.entries.push_back( { id, addition_error_count( n ), std::nullopt } );
      continue;
    }
    std::vector<domain_point> pts;
    for ( std::uint64_t b = 0; b < count; ++b )
      for ( std::uint64_t z = 0; z < 2u * count; ++z )
        if ( z != a + b )
          pts.push_back( a | ( b << n ) | ( z << ( 2u * n ) ) );
    add_explicit_entry( p, id, std::move( pts ) );
  }
  return p;
}

/* ---------------------------------------------------------------------------
 * Best adaptive elimination
 * ------------------------------------------------------------------------- */

/*! \brief max{2^n - floor(m), 0}. */
inline big_int optimal_elimination_curve( unsigned n, const big_int& m )
{
  const big_int all = big_int( 1 ) << n;
  return m >= all ? big_int( 0 ) : big_int( all - m );
}

/*! \brief Fewest survivors after m well-chosen labels, for pairwise-disjoint
    explicit error sets.

  Each label hits at most one set, so the best count is the number of empty
  sets plus max{nonempty - m, 0}.
*/
inline big_int best_adaptive_survivors( const error_profile& p, const big_int& m )
{
  if ( !p.has_explicit_sets() )
    fail( error_kind::capability, "best adaptive survivors need explicit error sets" );
  std::map<domain_point, std::size_t> owner;
  std::size_t empty = 0;
  for ( std::size_t i = 0; i < p.entries.size(); ++i )
  {
    if ( p.entries[i].points->empty() )
      ++empty;
    for ( auto x : *p.entries[i].points )
      if ( const auto [it, fresh] = owner.emplace( x, i ); !fresh )
        fail( error_kind::overlap, "error sets of " + p.entries[it->second].id + " and " + p.entries[i].id + " share point " + std::to_string( x ) );
  }
  const big_int nonempty = p.entries.size() - empty;
  return big_int( empty ) + ( m >= nonempty ? big_int( 0 ) : big_int( nonempty - m ) );
}

/* ---------------------------------------------------------------------------
 * Size exponents and the heatmap grid
 * ------------------------------------------------------------------------- */

/*! \brief Decimal exponent r in (0, 1] kept as the exact fraction num/den. */
struct size_exponent
{
  std::string text;
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  static size_exponent parse( const std::string& s )
  {
    size_exponent r;
    r.text = s;
    const auto dot = s.find( '.' );
    const auto whole = s.substr( 0, dot );
    const auto frac = dot == std::string::npos ? std::string{} : s.substr( dot + 1u );
    auto digits = []( const std::string& t ) { return std::all_of( t.begin(), t.end(), []( char c ) { return c >= '0' && c <= '9'; } ); };
    if ( ( whole.empty() && frac.empty() ) || !digits( whole ) || !digits( frac ) || frac.size() > 6u || whole.size() > 6u )
      fail( error_kind::parse, "malformed size exponent '" + s + "'" );
    r.den = 1;
    for ( std::size_t i = 0; i < frac.size(); ++i )
      r.den *= 10u;
    r.num = ( whole.empty() ? 0u : std::stoull( whole ) ) * r.den + ( frac.empty() ? 0u : std::stoull( frac ) );
    if ( r.num == 0u )
      fail( error_kind::invalid_argument, "size exponent must be positive" );
    return r;
  }
};

/*! floor(2^(r n)) computed exactly as an integer root. */
inline big_int sample_size_from_exponent( unsigned n, const size_exponent& r )
{
  const auto g = std::gcd( r.num * n, r.den );
  const auto p = r.num * n / g;
  const auto q = r.den / g;
  if ( p > 1u << 20 )
    fail( error_kind::resource_budget, "size exponent too large" );
  const big_int target = big_int( 1 ) << p;
  if ( q == 1u )
    return target;
  big_int lo = big_int( 1 ) << ( p / q ), hi = big_int( 1 ) << ( p / q + 1u );
  while ( hi - lo > 1 )
  {
    const big_int mid = ( lo + hi ) / 2;
    if ( boost::multiprecision::pow( mid, static_cast<unsigned>( q ) ) <= target )
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

inline std::vector<size_exponent> default_size_exponents()
{
  std::vector<size_exponent> out;
  for ( const char* s : { "0.25", "0.5", "0.75", "0.9", "0.95", "0.99", "1" } )
    out.push_back( size_exponent::parse( s ) );
  return out;
}

inline std::vector<unsigned> default_heatmap_lengths()
{
  return { 12, 16, 20, 24, 32, 40 };
}

struct heatmap_cell
{
  unsigned n = 0;
  size_exponent exponent;
  big_int m;
  big_int remaining;
};

inline std::vector<heatmap_cell> elimination_heatmap( std::span<const unsigned> lengths, std::span<const size_exponent> exponents )
{
  std::vector<heatmap_cell> out;
  for ( auto n : lengths )
    for ( const auto& r : exponents )
    {
      heatmap_cell c{ n, r, sample_size_from_exponent( n, r ), 0 };
      c.remaining = optimal_elimination_curve( n, c.m );
      out.push_back( std::move( c ) );
    }
  return out;
}

/* ---------------------------------------------------------------------------
 * Subset restriction
 * ------------------------------------------------------------------------- */

struct restriction_report
{
  error_profile profile;
  /*! Entries whose restricted error set is empty: p = 1 for every m. */
  std::vector<bool> unkillable;
  std::uint64_t unique_errors = 0;
  std::uint64_t unique_inside = 0;
  big_int error_mass = 0;
  big_int error_mass_inside = 0;

  double unique_coverage() const { return unique_errors == 0u ? 1.0 : static_cast<double>( unique_inside ) / static_cast<double>( unique_errors ); }
  double mass_coverage() const { return error_mass == 0 ? 1.0 : static_cast<double>( big_rational( error_mass_inside, error_mass ) ); }
};

/*! \brief Restricts every explicit error set to Q' = {x : inside(x)}, where
    |Q'| = subset_size. */
inline restriction_report restrict_to_subset( const error_profile& p, const std::function<bool( domain_point )>& inside, const big_int& subset_size )
{
  if ( !p.has_explicit_sets() )
    fail( error_kind::capability, "subset restriction needs explicit error sets" );
  if ( subset_size < 0 || subset_size > p.population )
    fail( error_kind::invalid_argument, "subset size must be in [0, |Q|]" );
  restriction_report r;
  r.profile.population = subset_size;
  r.profile.domain = p.domain;
  std::vector<domain_point> unique;
  for ( const auto& h : p.entries )
  {
    std::vector<domain_point> kept;
    for ( auto x : *h.points )
      if ( inside( x ) )
        kept.push_back( x );
    unique.insert( unique.end(), h.points->begin(), h.points->end() );
    r.error_mass += h.points->size();
    r.error_mass_inside += kept.size();
    r.unkillable.push_back( kept.empty() );
    add_explicit_entry( r.profile, h.id, std::move( kept ) );
  }
  std::sort( unique.begin(), unique.end() );
  unique.erase( std::unique( unique.begin(), unique.end() ), unique.end() );
  r.unique_errors = unique.size();
  r.unique_inside = static_cast<std::uint64_t>( std::count_if( unique.begin(), unique.end(), inside ) );
  for ( const auto& h : r.profile.entries )
    if ( h.error_count > subset_size )
      fail( error_kind::invalid_argument, "restricted error set of " + h.id + " is larger than the subset" );
  return r;
}

/*! \brief Restriction to an explicit sorted point list; |Q'| is its length. */
inline restriction_report restrict_to_subset( const error_profile& p, std::span<const domain_point> subset )
{
  if ( !std::is_sorted( subset.begin(), subset.end() ) || std::adjacent_find( subset.begin(), subset.end() ) != subset.end() )
    fail( error_kind::invalid_argument, "subset must be sorted and distinct" );
  return restrict_to_subset(
      p, [subset]( domain_point x ) { return std::binary_search( subset.begin(), subset.end(), x ); }, big_int( subset.size() ) );
}

/* ---------------------------------------------------------------------------
 * Addition held-out points and the targeted subset
 * ------------------------------------------------------------------------- */

/*! \brief The n + 2 held-out examples of operand pair (a, b): the true sum
    and every one-bit flip of it, in flip-position order after the sum. */
inline std::vector<domain_point> addition_held_out_points( unsigned n, std::uint64_t a, std::uint64_t b )
{
  const std::uint64_t s = a + b;
  std::vector<domain_point> out{ a | ( b << n ) | ( s << ( 2u * n ) ) };
  for ( unsigned k = 0; k <= n; ++k )
    out.push_back( a | ( b << n ) | ( ( s ^ ( std::uint64_t{ 1 } << k ) ) << ( 2u * n ) ) );
  return out;
}

/*! \brief Membership in the targeted subset: the true sum, or a flip of one
    of the three most significant output bits (positions n-2, n-1, n counted
    from the least significant bit; 8, 9, 10 at n = 10). */
inline std::function<bool( domain_point )> targeted_addition_predicate( unsigned n )
{
  if ( n < 2u || n > 20u )
    fail( error_kind::invalid_argument, "targeted subset needs operand length in [2, 20]" );
  return [n]( domain_point x ) {
    const std::uint64_t mask = ( std::uint64_t{ 1 } << n ) - 1u;
    const auto a = x & mask, b = ( x >> n ) & mask, z = x >> ( 2u * n );
    const auto d = z ^ ( a + b );
    return d == 0u || d == ( std::uint64_t{ 1 } << n ) || d == ( std::uint64_t{ 1 } << ( n - 1u ) ) || d == ( std::uint64_t{ 1 } << ( n - 2u ) );
  };
}

/*! Targeted subset size for a held-out set of `pairs` operand pairs. */
inline big_int targeted_addition_size( const big_int& pairs )
{
  return 4 * pairs;
}

} // namespace certlab
