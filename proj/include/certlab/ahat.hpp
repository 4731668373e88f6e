#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "fixed_precision.hpp"
#include "trigger.hpp"
#include "truth_table.hpp"

namespace certlab
{

using fp_vector = std::vector<double>;
/*! Row-major: one inner vector per output coordinate. */
using fp_matrix = std::vector<fp_vector>;

/*! \brief One averaging-hard attention head.

  The head reads view_j = layer_norm(proj h_j), forms q = wq view + bq,
  k = wk view + bk, v = wv view + bv, scores score_scale * <q_i, k_j>, and
  writes wo * (average of v over the maximizers) into the residual.
*/
struct ahat_head
{
  fp_matrix proj;
  fp_matrix wq;
  fp_vector bq;
  fp_matrix wk;
  fp_vector bk;
  fp_matrix wv;
  fp_vector bv;
  fp_matrix wo;
  double score_scale = 1.0;
};

/*! FF(x) = w2 relu(w1 layer_norm(proj h) + b1) + b2, added to the residual. */
struct ahat_feedforward
{
  fp_matrix proj;
  fp_matrix w1;
  fp_vector b1;
  fp_matrix w2;
  fp_vector b2;
};

struct ahat_layer
{
  std::vector<ahat_head> heads;
  ahat_feedforward ff;
};

struct readout_term
{
  std::size_t coord = 0;
  double coefficient = 0.0;
};

/*! logit = tau(<a, u> + b), then logit = tau(logit + tau(c u[coord])) for
    each override term in order; output 1[logit >= 0]. */
struct ahat_readout
{
  fp_vector a;
  double b = 0.0;
  std::vector<readout_term> override_terms;
};

/*! \brief Projected-pre-norm AHAT classifier on {0,1}^n.

  Position i (0-based) carries token x_{i+1}; the classifier reads the state
  at the last position.
*/
struct ahat_transformer
{
  fixed_precision fp = minimum_precision();
  unsigned n = 1;
  std::size_t dim = 1;
  /*! embedding[token][position], each of length dim. */
  std::array<std::vector<fp_vector>, 2> embedding;
  std::vector<ahat_layer> layers;
  ahat_readout readout;

  void validate() const;
};

namespace detail
{

inline void check_matrix( const fixed_precision& fp, const fp_matrix& m, std::size_t rows, std::size_t cols, const std::string& what )
{
  if ( rows == 0u || ( rows != 0u && m.size() != rows ) )
    fail( error_kind::structural, what + " has the wrong number of rows" );
  for ( const auto& r : m )
  {
    if ( r.size() != cols )
      fail( error_kind::structural, what + " has a row of the wrong length" );
    for ( auto v : r )
      fp.require( v, what + " entry" );
  }
}

inline void check_vector( const fixed_precision& fp, const fp_vector& v, std::size_t len, const std::string& what )
{
  if ( v.size() != len )
    fail( error_kind::structural, what + " has the wrong length" );
  for ( auto x : v )
    fp.require( x, what + " entry" );
}

inline std::size_t rows_of( const fp_matrix& m, const std::string& what )
{
  if ( m.empty() )
    fail( error_kind::structural, what + " is empty" );
  return m.size();
}

} // namespace detail

inline void ahat_transformer::validate() const
{
  if ( n < 1u || n > 24u )
    fail( error_kind::invalid_argument, "input length must be in [1, 24]" );
  if ( dim < 1u )
    fail( error_kind::structural, "model dimension must be positive" );
  for ( const auto& per_token : embedding )
  {
    if ( per_token.size() != n )
      fail( error_kind::structural, "embedding needs one vector per position" );
    for ( const auto& v : per_token )
      detail::check_vector( fp, v, dim, "embedding" );
  }
  for ( std::size_t l = 0; l < layers.size(); ++l )
  {
    const auto tag = "layer " + std::to_string( l );
    for ( std::size_t k = 0; k < layers[l].heads.size(); ++k )
    {
      const auto& h = layers[l].heads[k];
      const auto htag = tag + " head " + std::to_string( k );
      const auto r = detail::rows_of( h.proj, htag + " projection" );
      detail::check_matrix( fp, h.proj, r, dim, htag + " projection" );
      const auto dq = detail::rows_of( h.wq, htag + " query map" );
      detail::check_matrix( fp, h.wq, dq, r, htag + " query map" );
      detail::check_vector( fp, h.bq, dq, htag + " query bias" );
      detail::check_matrix( fp, h.wk, dq, r, htag + " key map" );
      detail::check_vector( fp, h.bk, dq, htag + " key bias" );
      const auto dv = detail::rows_of( h.wv, htag + " value map" );
      detail::check_matrix( fp, h.wv, dv, r, htag + " value map" );
      detail::check_vector( fp, h.bv, dv, htag + " value bias" );
      detail::check_matrix( fp, h.wo, dim, dv, htag + " output map" );
      fp.require( h.score_scale, htag + " score scale" );
      if ( h.score_scale <= 0.0 )
        fail( error_kind::structural, htag + " score scale must be positive" );
    }
    const auto& ff = layers[l].ff;
    const auto r = detail::rows_of( ff.proj, tag + " feedforward projection" );
    detail::check_matrix( fp, ff.proj, r, dim, tag + " feedforward projection" );
    const auto hidden = detail::rows_of( ff.w1, tag + " feedforward w1" );
    detail::check_matrix( fp, ff.w1, hidden, r, tag + " feedforward w1" );
    detail::check_vector( fp, ff.b1, hidden, tag + " feedforward b1" );
    detail::check_matrix( fp, ff.w2, dim, hidden, tag + " feedforward w2" );
    detail::check_vector( fp, ff.b2, dim, tag + " feedforward b2" );
  }
  detail::check_vector( fp, readout.a, dim, "classifier weights" );
  fp.require( readout.b, "classifier bias" );
  for ( const auto& t : readout.override_terms )
  {
    if ( t.coord >= dim )
      fail( error_kind::structural, "override term reads a coordinate outside the model" );
    fp.require( t.coefficient, "override coefficient" );
  }
}

/* ---------------------------------------------------------------------------
 * Forward pass
 * ------------------------------------------------------------------------- */

namespace detail
{

/*! Left-to-right matrix-vector product without bias. */
inline fp_vector matvec( const fixed_precision& fp, const fp_matrix& m, std::span<const double> x )
{
  fp_vector out( m.size() );
  for ( std::size_t r = 0; r < m.size(); ++r )
  {
    double acc = 0.0;
    for ( std::size_t k = 0; k < x.size(); ++k )
    {
      const double t = fp.mul( m[r][k], x[k] );
      acc = k == 0u ? t : fp.add( acc, t );
    }
    out[r] = acc;
  }
  return out;
}

inline fp_vector affine( const fixed_precision& fp, const fp_matrix& m, const fp_vector& b, std::span<const double> x )
{
  auto out = matvec( fp, m, x );
  for ( std::size_t r = 0; r < out.size(); ++r )
    out[r] = fp.add( out[r], b[r] );
  return out;
}

inline double dot( const fixed_precision& fp, std::span<const double> a, std::span<const double> b )
{
  double acc = 0.0;
  for ( std::size_t k = 0; k < a.size(); ++k )
  {
    const double t = fp.mul( a[k], b[k] );
    acc = k == 0u ? t : fp.add( acc, t );
  }
  return acc;
}

} // namespace detail

/*! Normalized views layer_norm(proj h_j) of a head at every position. */
inline std::vector<fp_vector> head_views( const fixed_precision& fp, const ahat_head& head, const std::vector<fp_vector>& states )
{
  std::vector<fp_vector> views;
  views.reserve( states.size() );
  for ( const auto& h : states )
    views.push_back( layer_norm( fp, detail::matvec( fp, head.proj, h ) ) );
  return views;
}

/*! Unscaled scores <q_i, k_j> for every key position j. */
inline fp_vector head_raw_scores( const fixed_precision& fp, const ahat_head& head, const std::vector<fp_vector>& views, std::size_t query )
{
  const auto q = detail::affine( fp, head.wq, head.bq, views.at( query ) );
  fp_vector s;
  for ( const auto& v : views )
    s.push_back( detail::dot( fp, q, detail::affine( fp, head.wk, head.bk, v ) ) );
  return s;
}

/*! \brief AHAT head output at one query position.

  Maximizers are taken over tau(score_scale * raw score). The output is the
  coordinatewise left-to-right sum of the maximizer values (ascending
  position), divided by tau(count).
*/
inline fp_vector attention_head( const fixed_precision& fp, const ahat_head& head, const std::vector<fp_vector>& views, std::size_t query )
{
  if ( views.empty() )
    fail( error_kind::invalid_argument, "attention needs at least one key position" );
  const auto raw = head_raw_scores( fp, head, views, query );
  fp_vector scaled( raw.size() );
  for ( std::size_t j = 0; j < raw.size(); ++j )
    scaled[j] = fp.mul( head.score_scale, raw[j] );
  const double best = *std::max_element( scaled.begin(), scaled.end() );
  fp_vector acc;
  std::size_t count = 0;
  for ( std::size_t j = 0; j < views.size(); ++j )
  {
    if ( scaled[j] != best )
      continue;
    const auto v = detail::affine( fp, head.wv, head.bv, views[j] );
    if ( count++ == 0u )
      acc = v;
    else
      for ( std::size_t c = 0; c < acc.size(); ++c )
        acc[c] = fp.add( acc[c], v[c] );
  }
  const double denom = fp.round( static_cast<double>( count ) );
  for ( auto& v : acc )
    v = fp.div( v, denom );
  return acc;
}

inline std::vector<fp_vector> embed( const ahat_transformer& t, domain_point x )
{
  std::vector<fp_vector> states;
  for ( unsigned i = 0; i < t.n; ++i )
    states.push_back( t.embedding[( x >> i ) & 1u][i] );
  return states;
}

/*! \brief One layer: all heads read the incoming states, their updates are
    added head by head, then the feedforward update is added. */
inline std::vector<fp_vector> apply_layer( const fixed_precision& fp, const ahat_layer& layer, const std::vector<fp_vector>& states )
{
  auto next = states;
  std::vector<std::vector<fp_vector>> outs;
  for ( const auto& head : layer.heads )
  {
    const auto views = head_views( fp, head, states );
    std::vector<fp_vector> per_pos;
    for ( std::size_t i = 0; i < states.size(); ++i )
      per_pos.push_back( detail::matvec( fp, head.wo, attention_head( fp, head, views, i ) ) );
    outs.push_back( std::move( per_pos ) );
  }
  for ( const auto& per_pos : outs )
    for ( std::size_t i = 0; i < states.size(); ++i )
      for ( std::size_t c = 0; c < next[i].size(); ++c )
        next[i][c] = fp.add( next[i][c], per_pos[i][c] );
  for ( auto& h : next )
  {
    const auto y = layer_norm( fp, detail::matvec( fp, layer.ff.proj, h ) );
    auto u = detail::affine( fp, layer.ff.w1, layer.ff.b1, y );
    for ( auto& v : u )
      v = fp.relu( v );
    const auto o = detail::affine( fp, layer.ff.w2, layer.ff.b2, u );
    for ( std::size_t c = 0; c < h.size(); ++c )
      h[c] = fp.add( h[c], o[c] );
  }
  return next;
}

inline double readout_logit( const ahat_transformer& t, const fp_vector& u )
{
  const auto& fp = t.fp;
  double logit = fp.affine( t.readout.a, u, t.readout.b );
  for ( const auto& term : t.readout.override_terms )
    logit = fp.add( logit, fp.mul( term.coefficient, u[term.coord] ) );
  return logit;
}

struct ahat_trace
{
  /*! states[l] is the residual stream entering layer l; the last entry is
      the final state. */
  std::vector<std::vector<fp_vector>> states;
  double logit = 0.0;
  bool output = false;
};

inline ahat_trace forward_trace( const ahat_transformer& t, domain_point x )
{
  if ( x >> t.n )
    fail( error_kind::invalid_argument, "input has more than n bits" );
  ahat_trace tr;
  tr.states.push_back( embed( t, x ) );
  for ( const auto& layer : t.layers )
    tr.states.push_back( apply_layer( t.fp, layer, tr.states.back() ) );
  tr.logit = readout_logit( t, tr.states.back().back() );
  tr.output = tr.logit >= 0.0;
  return tr;
}

inline bool forward( const ahat_transformer& t, domain_point x )
{
  return forward_trace( t, x ).output;
}

/*! Truth table of the classifier, inputs split across `jobs` threads. */
inline truth_table compute_truth_table( const ahat_transformer& t, unsigned jobs = 1 )
{
  if ( t.n > 20u )
    fail( error_kind::resource_budget, "exhaustive evaluation is limited to n <= 20" );
  const domain_point total = domain_point{ 1 } << t.n;
  std::vector<char> bits( total );
  const auto workers = std::max<domain_point>( 1, std::min<domain_point>( jobs, total ) );
  auto work = [&]( domain_point w ) {
    for ( domain_point x = w; x < total; x += workers )
      bits[x] = forward( t, x ) ? 1 : 0;
  };
  if ( workers == 1u )
    work( 0 );
  else
  {
    std::vector<std::jthread> pool;
    for ( domain_point w = 0; w < workers; ++w )
      pool.emplace_back( work, w );
  }
  return truth_table::from_function( t.n, [&]( domain_point x ) { return bits[x] != 0; } );
}

/* ---------------------------------------------------------------------------
 * Trigger code and the block override
 * ------------------------------------------------------------------------- */

inline constexpr unsigned minimum_precision_bits = 8u;

inline const fp_vector& trigger_code_alpha()
{
  static const fp_vector v{ 0.5, 0.5, -0.5, -0.5 };
  return v;
}
inline const fp_vector& trigger_code_beta()
{
  static const fp_vector v{ 0.5, -0.5, 0.5, -0.5 };
  return v;
}
inline const fp_vector& trigger_code_gamma()
{
  static const fp_vector v{ 0.5, -0.5, -0.5, 0.5 };
  return v;
}
inline const fp_vector& trigger_query()
{
  static const fp_vector v{ 2.0, -1.0, 1.0, 0.0 };
  return v;
}

/*! Checks layer_norm(c) = c for the three code vectors and that the gadget
    constants are members of D_p. */
inline bool verify_layer_norm_fixed_points( const fixed_precision& fp )
{
  for ( double c : { 0.0, 0.5, -0.5, 1.0, -1.0, 2.0 } )
    if ( !fp.representable( c ) )
      return false;
  for ( const auto* v : { &trigger_code_alpha(), &trigger_code_beta(), &trigger_code_gamma() } )
    if ( layer_norm( fp, *v ) != *v )
      return false;
  return true;
}

/*! Code C_i(a): alpha off the trigger, beta on a mismatch, gamma on a match. */
inline const fp_vector& trigger_code( const trigger_spec& trig, unsigned position, bool token )
{
  for ( std::size_t k = 0; k < trig.coords.size(); ++k )
    if ( trig.coords[k] == position + 1u )
      return token == trig.pattern[k] ? trigger_code_gamma() : trigger_code_beta();
  return trigger_code_alpha();
}

namespace detail
{

inline fp_matrix pad_columns( fp_matrix m, std::size_t extra )
{
  for ( auto& r : m )
    r.resize( r.size() + extra, 0.0 );
  return m;
}

inline fp_matrix pad_rows( fp_matrix m, std::size_t extra )
{
  const auto cols = m.empty() ? 0u : m.front().size();
  m.resize( m.size() + extra, fp_vector( cols, 0.0 ) );
  return m;
}

} // namespace detail

/*! \brief Override model agreeing with `base` off the trigger block and
    outputting `trig.override_label` on it.

  Adds 6 residual coordinates (code block, then z1 and z2), pads every
  inherited map with zeros, appends the trigger head to the final layer and
  two readout terms (2 sigma - 1) F z1 and (2 sigma - 1) F z2.
*/
inline ahat_transformer block_override( const ahat_transformer& base, const trigger_spec& trig )
{
  base.validate();
  trig.validate( base.n );
  if ( base.fp.precision() < minimum_precision_bits || !verify_layer_norm_fixed_points( base.fp ) )
    fail( error_kind::precision, "block override needs p >= " + std::to_string( minimum_precision_bits ) + " and exact code vectors" );
  if ( base.layers.empty() )
    fail( error_kind::unsupported_depth, "block override needs at least one layer" );

  constexpr std::size_t extra = 6;
  const auto m = base.dim;
  ahat_transformer t = base;
  t.dim = m + extra;
  for ( unsigned a = 0; a < 2u; ++a )
    for ( unsigned i = 0; i < base.n; ++i )
    {
      auto& v = t.embedding[a][i];
      const auto& code = trigger_code( trig, i, a == 1u );
      v.insert( v.end(), code.begin(), code.end() );
      v.push_back( 0.0 );
      v.push_back( 0.0 );
    }
  for ( auto& layer : t.layers )
  {
    for ( auto& h : layer.heads )
    {
      h.proj = detail::pad_columns( std::move( h.proj ), extra );
      h.wo = detail::pad_rows( std::move( h.wo ), extra );
    }
    layer.ff.proj = detail::pad_columns( std::move( layer.ff.proj ), extra );
    layer.ff.w2 = detail::pad_rows( std::move( layer.ff.w2 ), extra );
    layer.ff.b2.resize( t.dim, 0.0 );
  }

  ahat_head g;
  g.proj.assign( 4, fp_vector( t.dim, 0.0 ) );
  for ( std::size_t k = 0; k < 4u; ++k )
    g.proj[k][m + k] = 1.0;
  g.wq.assign( 4, fp_vector( 4, 0.0 ) );
  g.bq = trigger_query();
  g.wk.assign( 4, fp_vector( 4, 0.0 ) );
  for ( std::size_t k = 0; k < 4u; ++k )
    g.wk[k][k] = 1.0;
  g.bk.assign( 4, 0.0 );
  g.wv = { { 0.0, -1.0, -1.0, 0.0 } };
  g.bv = { 0.0 };
  g.wo.assign( t.dim, fp_vector( 1, 0.0 ) );
  g.wo[m + 4u][0] = 1.0;
  g.wo[m + 5u][0] = 1.0;
  g.score_scale = 0.5;
  t.layers.back().heads.push_back( std::move( g ) );

  t.readout.a.resize( t.dim, 0.0 );
  const double f = trig.override_label ? base.fp.max_value() : -base.fp.max_value();
  t.readout.override_terms.push_back( { m + 4u, f } );
  t.readout.override_terms.push_back( { m + 5u, f } );
  t.validate();
  return t;
}

struct override_report
{
  std::uint64_t checked = 0;
  std::uint64_t off_block_mismatches = 0;
  std::uint64_t on_block_mismatches = 0;

  bool passed() const noexcept { return off_block_mismatches == 0u && on_block_mismatches == 0u; }
};

/*! \brief Compares `over` with `base` on inputs [lo, hi): equal off the
    block, equal to the label on it. */
inline override_report verify_block_override( const ahat_transformer& base, const ahat_transformer& over, const trigger_spec& trig, domain_point lo, domain_point hi, unsigned jobs = 1 )
{
  if ( base.n != over.n )
    fail( error_kind::arity_mismatch, "models differ in input length" );
  hi = std::min<domain_point>( hi, domain_point{ 1 } << base.n );
  override_report total;
  if ( lo >= hi )
    return total;
  const auto workers = std::max<domain_point>( 1, std::min<domain_point>( jobs, hi - lo ) );
  std::vector<override_report> parts( workers );
  auto work = [&]( domain_point w ) {
    auto& r = parts[w];
    for ( domain_point x = lo + w; x < hi; x += workers )
    {
      ++r.checked;
      const bool got = forward( over, x );
      if ( block_membership( x, trig, base.n ) )
        r.on_block_mismatches += got != trig.override_label ? 1u : 0u;
      else
        r.off_block_mismatches += got != forward( base, x ) ? 1u : 0u;
    }
  };
  if ( workers == 1u )
    work( 0 );
  else
  {
    std::vector<std::jthread> pool;
    for ( domain_point w = 0; w < workers; ++w )
      pool.emplace_back( work, w );
  }
  for ( const auto& r : parts )
  {
    total.checked += r.checked;
    total.off_block_mismatches += r.off_block_mismatches;
    total.on_block_mismatches += r.on_block_mismatches;
  }
  return total;
}

/* ---------------------------------------------------------------------------
 * Seeded base models
 * ------------------------------------------------------------------------- */

struct random_model_options
{
  unsigned max_layers = 3;
  std::size_t max_dim = 8;
  unsigned max_heads = 2;
  std::size_t max_view = 4;
  std::size_t max_head_dim = 3;
  std::size_t max_hidden = 4;
};

/*! \brief Reproducible base model with parameters drawn from small dyadics.

  Draws use `rng() % k` only, so a seed gives the same model with any
  standard library.
*/
inline ahat_transformer random_ahat_model( std::uint64_t seed, unsigned n, const random_model_options& opt = {}, const fixed_precision& fp = minimum_precision() )
{
  std::mt19937_64 rng( seed );
  auto pick = [&]( std::uint64_t lo, std::uint64_t hi ) { return lo + rng() % ( hi - lo + 1u ); };
  static constexpr double dyadics[] = { 0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5, 2.0, -2.0, 0.75, -0.75 };
  auto value = [&] { return dyadics[rng() % std::size( dyadics )]; };
  auto vec = [&]( std::size_t len ) {
    fp_vector v( len );
    for ( auto& x : v )
      x = value();
    return v;
  };
  auto mat = [&]( std::size_t rows, std::size_t cols ) {
    fp_matrix m( rows );
    for ( auto& r : m )
      r = vec( cols );
    return m;
  };

  ahat_transformer t;
  t.fp = fp;
  t.n = n;
  t.dim = static_cast<std::size_t>( pick( 1, opt.max_dim ) );
  for ( auto& per_token : t.embedding )
    for ( unsigned i = 0; i < n; ++i )
      per_token.push_back( vec( t.dim ) );
  const auto depth = static_cast<unsigned>( pick( 1, opt.max_layers ) );
  for ( unsigned l = 0; l < depth; ++l )
  {
    ahat_layer layer;
    const auto heads = static_cast<unsigned>( pick( 0, opt.max_heads ) );
    for ( unsigned k = 0; k < heads; ++k )
    {
      ahat_head h;
      const auto r = static_cast<std::size_t>( pick( 1, opt.max_view ) );
      const auto dq = static_cast<std::size_t>( pick( 1, opt.max_head_dim ) );
      const auto dv = static_cast<std::size_t>( pick( 1, opt.max_head_dim ) );
      h.proj = mat( r, t.dim );
      h.wq = mat( dq, r );
      h.bq = vec( dq );
      h.wk = mat( dq, r );
      h.bk = vec( dq );
      h.wv = mat( dv, r );
      h.bv = vec( dv );
      h.wo = mat( t.dim, dv );
      h.score_scale = ( rng() & 1u ) ? 0.5 : 1.0;
      layer.heads.push_back( std::move( h ) );
    }
    const auto r = static_cast<std::size_t>( pick( 1, opt.max_view ) );
    const auto hidden = static_cast<std::size_t>( pick( 1, opt.max_hidden ) );
    layer.ff.proj = mat( r, t.dim );
    layer.ff.w1 = mat( hidden, r );
    layer.ff.b1 = vec( hidden );
    layer.ff.w2 = mat( t.dim, hidden );
    layer.ff.b2 = vec( t.dim );
    t.layers.push_back( std::move( layer ) );
  }
  t.readout.a = vec( t.dim );
  t.readout.b = value();
  t.validate();
  return t;
}

} // namespace certlab
