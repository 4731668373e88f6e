#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "trigger.hpp"
#include "truth_table.hpp"

namespace certlab
{

/*! \brief Finite set of Boolean functions of one arity, stored as flat words.

  Members are kept in insertion order; adding a table already present is a
  no-op.
*/
class hypothesis_class
{
public:
  explicit hypothesis_class( unsigned arity = 0 )
      : arity_( arity ), stride_( words_for_arity( arity ) )
  {
    if ( arity > max_table_arity )
      fail( error_kind::resource_budget, "class arity exceeds table limit" );
  }

  template<typename Range>
  static hypothesis_class from_tables( unsigned arity, const Range& tables )
  {
    hypothesis_class h( arity );
    for ( const auto& t : tables )
      h.insert( t );
    return h;
  }

  /*! Returns true when the table was new. */
  bool insert( const truth_table& t )
  {
    if ( t.arity() != arity_ )
      fail( error_kind::arity_mismatch, "member arity " + std::to_string( t.arity() ) + " differs from class arity " + std::to_string( arity_ ) );
    return insert_words( t.words() );
  }

  bool insert_words( std::span<const std::uint64_t> w )
  {
    if ( w.size() != stride_ )
      fail( error_kind::arity_mismatch, "member word count differs from class stride" );
    if ( ( size() + 1u ) * 2u > slots_.size() )
      grow();
    auto slot = probe( w );
    if ( slots_[slot] != 0u )
      return false;
    slots_[slot] = size() + 1u;
    words_.insert( words_.end(), w.begin(), w.end() );
    return true;
  }

  bool contains( const truth_table& t ) const
  {
    return t.arity() == arity_ && find( t.words() ).has_value();
  }

  std::optional<std::size_t> find( std::span<const std::uint64_t> w ) const
  {
    if ( slots_.empty() || w.size() != stride_ )
      return std::nullopt;
    const auto s = slots_[probe( w )];
    if ( s == 0u )
      return std::nullopt;
    return s - 1u;
  }

  unsigned arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return words_.size() / stride_; }
  bool empty() const noexcept { return words_.empty(); }
  std::size_t stride() const noexcept { return stride_; }

  std::span<const std::uint64_t> member_words( std::size_t i ) const noexcept
  {
    return { words_.data() + i * stride_, stride_ };
  }

  truth_table member( std::size_t i ) const
  {
    auto w = member_words( i );
    return truth_table( arity_, std::vector<std::uint64_t>( w.begin(), w.end() ) );
  }

  bool member_bit( std::size_t i, domain_point x ) const noexcept
  {
    return ( words_[i * stride_ + ( x >> 6 )] >> ( x & 63u ) ) & 1u;
  }

  std::vector<truth_table> members() const
  {
    std::vector<truth_table> out;
    out.reserve( size() );
    for ( std::size_t i = 0; i < size(); ++i )
      out.push_back( member( i ) );
    return out;
  }

  void reserve( std::size_t n )
  {
    words_.reserve( n * stride_ );
    while ( slots_.size() < 2u * n )
      grow();
  }

private:
  static std::uint64_t hash_words( std::span<const std::uint64_t> w ) noexcept
  {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for ( auto v : w )
    {
      h ^= v + 0x9e3779b97f4a7c15ull + ( h << 6 ) + ( h >> 2 );
      h *= 0xff51afd7ed558ccdull;
    }
    return h ^ ( h >> 33 );
  }

  /*! Slot holding w, or the empty slot where it would go. */
  std::size_t probe( std::span<const std::uint64_t> w ) const noexcept
  {
    const auto mask = slots_.size() - 1u;
    auto slot = static_cast<std::size_t>( hash_words( w ) ) & mask;
    while ( slots_[slot] != 0u )
    {
      auto m = member_words( slots_[slot] - 1u );
      if ( std::equal( m.begin(), m.end(), w.begin() ) )
        break;
      slot = ( slot + 1u ) & mask;
    }
    return slot;
  }

  void grow()
  {
    slots_.assign( slots_.empty() ? 16u : slots_.size() * 2u, 0u );
    for ( std::size_t i = 0; i < size(); ++i )
      slots_[probe( member_words( i ) )] = i + 1u;
  }

  unsigned arity_;
  std::size_t stride_;
  std::vector<std::uint64_t> words_;
  std::vector<std::size_t> slots_; ///< member index + 1, 0 when empty
};

/*! Input points of a sample; labels come from the target. */
struct labeled_sample
{
  std::vector<domain_point> points;

  /*! Throws unless all points lie in {0,1}^n and none repeats. */
  void validate( unsigned arity ) const
  {
    std::vector<domain_point> sorted = points;
    std::sort( sorted.begin(), sorted.end() );
    if ( std::adjacent_find( sorted.begin(), sorted.end() ) != sorted.end() )
      fail( error_kind::invalid_argument, "sample contains a duplicate point" );
    for ( auto x : points )
      if ( arity < 64u && ( x >> arity ) != 0u )
        fail( error_kind::invalid_argument, "sample point " + std::to_string( x ) + " outside {0,1}^" + std::to_string( arity ) );
  }
};

namespace detail
{

inline void check_target( const hypothesis_class& h, const truth_table& target )
{
  if ( target.arity() != h.arity() )
    fail( error_kind::arity_mismatch, "target arity " + std::to_string( target.arity() ) + " differs from class arity " + std::to_string( h.arity() ) );
}

inline bool agrees_on( const hypothesis_class& h, std::size_t i, const truth_table& target, std::span<const domain_point> points )
{
  return std::all_of( points.begin(), points.end(), [&]( auto x ) { return h.member_bit( i, x ) == target.bit( x ); } );
}

inline std::uint64_t distance( std::span<const std::uint64_t> a, std::span<const std::uint64_t> b ) noexcept
{
  std::uint64_t d = 0;
  for ( std::size_t k = 0; k < a.size(); ++k )
    d += static_cast<std::uint64_t>( std::popcount( a[k] ^ b[k] ) );
  return d;
}

} // namespace detail

inline hypothesis_class version_space( const hypothesis_class& h, const truth_table& target, const labeled_sample& s )
{
  detail::check_target( h, target );
  s.validate( h.arity() );
  hypothesis_class out( h.arity() );
  for ( std::size_t i = 0; i < h.size(); ++i )
    if ( detail::agrees_on( h, i, target, s.points ) )
      out.insert_words( h.member_words( i ) );
  return out;
}

/*! True iff every member consistent with the target on `s` equals the target. */
inline bool is_certificate( const hypothesis_class& h, const truth_table& target, const labeled_sample& s )
{
  detail::check_target( h, target );
  s.validate( h.arity() );
  for ( std::size_t i = 0; i < h.size(); ++i )
  {
    if ( !detail::agrees_on( h, i, target, s.points ) )
      continue;
    auto w = h.member_words( i );
    if ( !std::equal( w.begin(), w.end(), target.words().begin() ) )
      return false;
  }
  return true;
}

enum class error_mode
{
  absolute,
  normalized
};

/*! Largest number of mistakes among members consistent with the target on `s`. */
inline std::uint64_t worst_remaining_error_count( const hypothesis_class& h, const truth_table& target, const labeled_sample& s )
{
  detail::check_target( h, target );
  s.validate( h.arity() );
  std::uint64_t worst = 0;
  for ( std::size_t i = 0; i < h.size(); ++i )
    if ( detail::agrees_on( h, i, target, s.points ) )
      worst = std::max( worst, detail::distance( h.member_words( i ), target.words() ) );
  return worst;
}

inline double worst_remaining_error( const hypothesis_class& h, const truth_table& target, const labeled_sample& s, error_mode mode )
{
  const auto worst = static_cast<double>( worst_remaining_error_count( h, target, s ) );
  return mode == error_mode::absolute ? worst : std::ldexp( worst, -static_cast<int>( h.arity() ) );
}

/* ---------------------------------------------------------------------------
 * Exact minimum certificates
 * ------------------------------------------------------------------------- */

struct certificate_result
{
  std::size_t size = 0;
  labeled_sample witness;
  std::uint64_t nodes = 0; ///< search nodes visited
};

inline constexpr std::uint64_t default_search_budget = 200'000'000ull;

namespace detail
{

/*! \brief Lexicographically first minimum hitting set.

  Every set must contain at least one chosen element. Elements are indices
  0..universe-1; sets are bitsets over them. Sample sizes are tried in
  increasing order and, within one size, subsets in lexicographic order, so
  the first hit is the lexicographically smallest minimum hitting set.
*/
class hitting_set_search
{
public:
  hitting_set_search( std::size_t universe, std::vector<std::vector<std::uint64_t>> sets, std::uint64_t budget )
      : universe_( universe ), words_( ( universe + 63u ) / 64u ), budget_( budget )
  {
    reduce( std::move( sets ) );
    for ( const auto& s : sets_ )
    {
      std::size_t hi = 0;
      for ( std::size_t e = 0; e < universe_; ++e )
        if ( has( s, e ) )
          hi = e;
      max_element_.push_back( hi );
    }
  }

  std::vector<std::size_t> solve()
  {
    if ( sets_.empty() )
      return {};
    for ( std::size_t k = 1; k <= universe_; ++k )
    {
      std::vector<std::size_t> unhit( sets_.size() );
      for ( std::size_t i = 0; i < unhit.size(); ++i )
        unhit[i] = i;
      chosen_.clear();
      if ( dfs( unhit, 0, k ) )
        return chosen_;
      refuted_ = k;
    }
    return {}; // unreachable: the full universe hits every nonempty set
  }

  std::uint64_t nodes() const noexcept { return nodes_; }
  std::size_t reduced_sets() const noexcept { return sets_.size(); }

private:
  bool has( const std::vector<std::uint64_t>& s, std::size_t e ) const noexcept
  {
    return ( s[e >> 6] >> ( e & 63u ) ) & 1u;
  }

  bool subset_of( const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b ) const noexcept
  {
    for ( std::size_t k = 0; k < words_; ++k )
      if ( a[k] & ~b[k] )
        return false;
    return true;
  }

  /*! Drops duplicates and supersets; hitting the minimal sets is enough. */
  void reduce( std::vector<std::vector<std::uint64_t>> sets )
  {
    auto card = [&]( const auto& s ) {
      std::size_t c = 0;
      for ( auto w : s )
        c += static_cast<std::size_t>( std::popcount( w ) );
      return c;
    };
    std::stable_sort( sets.begin(), sets.end(), [&]( const auto& a, const auto& b ) { return card( a ) < card( b ); } );
    for ( auto& s : sets )
    {
      if ( card( s ) == 0u )
        fail( error_kind::invalid_argument, "empty set cannot be hit" );
      bool redundant = false;
      for ( const auto& kept : sets_ )
        if ( subset_of( kept, s ) )
        {
          redundant = true;
          break;
        }
      if ( !redundant )
        sets_.push_back( std::move( s ) );
    }
  }

  /*! Size of a greedy family of pairwise disjoint unhit sets (restricted to
      elements >= from); each needs its own chosen element. */
  std::size_t packing_bound( const std::vector<std::size_t>& unhit, std::size_t from ) const
  {
    std::vector<std::uint64_t> used( words_, 0u );
    std::vector<std::uint64_t> mask( words_, 0u );
    for ( std::size_t e = from; e < universe_; ++e )
      mask[e >> 6] |= std::uint64_t{ 1 } << ( e & 63u );
    std::size_t count = 0;
    for ( auto i : unhit )
    {
      bool disjoint = true;
      for ( std::size_t k = 0; k < words_; ++k )
        if ( sets_[i][k] & mask[k] & used[k] )
        {
          disjoint = false;
          break;
        }
      if ( !disjoint )
        continue;
      ++count;
      for ( std::size_t k = 0; k < words_; ++k )
        used[k] |= sets_[i][k] & mask[k];
    }
    return count;
  }

  bool dfs( const std::vector<std::size_t>& unhit, std::size_t from, std::size_t remaining )
  {
    if ( ++nodes_ > budget_ )
      throw budget_error( "certificate search exceeded " + std::to_string( budget_ ) + " nodes; certificate size >= " + std::to_string( refuted_ + 1u ), refuted_ + 1u );
    if ( unhit.empty() )
      return true;
    if ( remaining == 0u )
      return false;
    // the next element must hit every unhit set eventually: it cannot exceed
    // the smallest maximum among them
    std::size_t limit = universe_;
    for ( auto i : unhit )
      limit = std::min( limit, max_element_[i] );
    if ( limit < from )
      return false;
    if ( packing_bound( unhit, from ) > remaining )
      return false;
    for ( std::size_t e = from; e <= limit; ++e )
    {
      std::vector<std::size_t> next;
      next.reserve( unhit.size() );
      bool hits = false;
      for ( auto i : unhit )
      {
        if ( has( sets_[i], e ) )
          hits = true;
        else
          next.push_back( i );
      }
      if ( !hits )
        continue;
      chosen_.push_back( e );
      if ( dfs( next, e + 1u, remaining - 1u ) )
        return true;
      chosen_.pop_back();
    }
    return false;
  }

  std::size_t universe_;
  std::size_t words_;
  std::uint64_t budget_;
  std::vector<std::vector<std::uint64_t>> sets_;
  std::vector<std::size_t> max_element_;
  std::vector<std::size_t> chosen_;
  std::uint64_t nodes_ = 0;
  std::size_t refuted_ = 0;
};

/*! Minimum sample hitting the disagreement set of every selected member. */
template<typename Select>
certificate_result min_hitting_sample( const hypothesis_class& h, const truth_table& target, Select&& select, std::uint64_t budget )
{
  detail::check_target( h, target );
  const auto stride = h.stride();
  // candidate points: where some member to be eliminated differs from the target
  std::vector<std::uint64_t> cand_words( stride, 0u );
  std::vector<std::size_t> chosen_members;
  for ( std::size_t i = 0; i < h.size(); ++i )
  {
    auto w = h.member_words( i );
    const auto d = distance( w, target.words() );
    if ( d == 0u || !select( d ) )
      continue;
    chosen_members.push_back( i );
    for ( std::size_t k = 0; k < stride; ++k )
      cand_words[k] |= w[k] ^ target.words()[k];
  }
  const truth_table cand_table( h.arity(), cand_words );
  const auto candidates = cand_table.ones();

  std::vector<std::vector<std::uint64_t>> sets;
  sets.reserve( chosen_members.size() );
  const std::size_t set_words = ( candidates.size() + 63u ) / 64u;
  for ( auto i : chosen_members )
  {
    std::vector<std::uint64_t> s( std::max<std::size_t>( set_words, 1u ), 0u );
    for ( std::size_t c = 0; c < candidates.size(); ++c )
      if ( h.member_bit( i, candidates[c] ) != target.bit( candidates[c] ) )
        s[c >> 6] |= std::uint64_t{ 1 } << ( c & 63u );
    sets.push_back( std::move( s ) );
  }

  hitting_set_search search( candidates.size(), std::move( sets ), budget );
  const auto picked = search.solve();
  certificate_result r;
  r.size = picked.size();
  for ( auto c : picked )
    r.witness.points.push_back( candidates[c] );
  r.nodes = search.nodes();
  return r;
}

} // namespace detail

/*! \brief Exact minimum certificate with the lexicographically smallest witness.

  Throws budget_error (carrying the proven lower bound) when the search
  visits more than `budget` nodes.
*/
inline certificate_result min_certificate( const hypothesis_class& h, const truth_table& target, std::uint64_t budget = default_search_budget )
{
  return detail::min_hitting_sample( h, target, []( std::uint64_t ) { return true; }, budget );
}

/*! \brief Exact minimum sample leaving only members within the tolerance.

  absolute: every survivor has at most `tolerance` mistakes.
  normalized: every survivor has error fraction at most `tolerance`.
*/
inline certificate_result approx_min_certificate( const hypothesis_class& h, const truth_table& target, double tolerance, error_mode mode,
                                                  std::uint64_t budget = default_search_budget )
{
  if ( !( tolerance >= 0.0 ) )
    fail( error_kind::invalid_argument, "tolerance must be nonnegative" );
  const auto scale = std::ldexp( 1.0, static_cast<int>( h.arity() ) );
  return detail::min_hitting_sample(
      h, target,
      [&]( std::uint64_t d ) {
        const auto dd = static_cast<double>( d );
        return mode == error_mode::absolute ? dd > tolerance : dd > tolerance * scale;
      },
      budget );
}

/* ---------------------------------------------------------------------------
 * Halving
 * ------------------------------------------------------------------------- */

struct halving_step
{
  domain_point point = 0;
  std::size_t count0 = 0; ///< survivors labeling the point 0 before the split
  std::size_t count1 = 0;
  bool kept = false;
};

struct halving_result
{
  std::size_t selected = 0; ///< member index in the input class
  truth_table target;
  labeled_sample sample;
  std::vector<halving_step> trace;
};

/*! \brief Deterministic halving over increasing points.

  At the first point (in increasing index order) where the survivors
  disagree, keep the smaller label side; equal sides keep label 0. Repeat
  until one member remains. The queried points certify it.
*/
inline halving_result halving_certificate( const hypothesis_class& h )
{
  if ( h.empty() )
    fail( error_kind::invalid_argument, "halving needs a nonempty class" );
  std::vector<std::size_t> alive( h.size() );
  for ( std::size_t i = 0; i < alive.size(); ++i )
    alive[i] = i;
  halving_result r;
  const auto nbits = std::uint64_t{ 1 } << h.arity();
  for ( domain_point x = 0; x < nbits && alive.size() > 1u; ++x )
  {
    std::size_t ones = 0;
    for ( auto i : alive )
      ones += h.member_bit( i, x ) ? 1u : 0u;
    const auto zeros = alive.size() - ones;
    if ( ones == 0u || zeros == 0u )
      continue;
    const bool keep = ones < zeros;
    std::erase_if( alive, [&]( auto i ) { return h.member_bit( i, x ) != keep; } );
    r.sample.points.push_back( x );
    r.trace.push_back( { x, zeros, ones, keep } );
  }
  r.selected = alive.front();
  r.target = h.member( r.selected );
  return r;
}

/* ---------------------------------------------------------------------------
 * Disjoint-block lower bound
 * ------------------------------------------------------------------------- */

/*! \brief Number of deceivers, after checking their disagreement sets with the
    target are nonempty and pairwise disjoint. */
inline std::size_t disjoint_block_lower_bound( const truth_table& target, std::span<const truth_table> deceivers )
{
  std::vector<std::int64_t> owner( static_cast<std::size_t>( target.num_bits() ), -1 );
  for ( std::size_t i = 0; i < deceivers.size(); ++i )
  {
    const auto e = compute_disagreement( deceivers[i], target );
    if ( e.empty() )
      fail( error_kind::invalid_deceiver, "deceiver " + std::to_string( i ) + " equals the target" );
    for ( auto x : e.points )
    {
      if ( owner[x] >= 0 )
        fail( error_kind::overlap, "deceivers " + std::to_string( owner[x] ) + " and " + std::to_string( i ) + " both disagree with the target at point " + std::to_string( x ) );
      owner[x] = static_cast<std::int64_t>( i );
    }
  }
  return deceivers.size();
}

inline std::size_t ceil_log2( std::uint64_t v ) noexcept
{
  return v <= 1u ? 0u : static_cast<std::size_t>( std::bit_width( v - 1u ) );
}

} // namespace certlab
