// certlab command-line front end.
//
// Every subcommand prints its main CSV to stdout. With --out DIR it also
// writes all artifacts plus manifest.json into DIR. Errors go to stderr as
// JSON; exit codes are 2 (configuration), 3 (resource budget) and
// 4 (verification failure).

#include <certlab/ahat.hpp>
#include <certlab/ahat_json.hpp>
#include <certlab/certify.hpp>
#include <certlab/class_enum.hpp>
#include <certlab/deceiver.hpp>
#include <certlab/presets.hpp>
#include <certlab/survivor.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/version.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace certlab;
using nlohmann::json;

namespace
{

constexpr const char* certlab_version = "0.1.0";

struct artifact
{
  std::string name;
  std::string content;
};

struct run_output
{
  std::vector<artifact> files;
  /*! Index of the artifact echoed to stdout. */
  std::size_t primary = 0;
};

struct common_options
{
  std::string out_dir;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
  bool long_run = false;
};

/* ---------------------------------------------------------------------------
 * Parsing helpers
 * ------------------------------------------------------------------------- */

std::vector<std::string> split( const std::string& s, char sep )
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in( s );
  while ( std::getline( in, cur, sep ) )
    if ( !cur.empty() )
      out.push_back( cur );
  return out;
}

std::uint64_t parse_u64( const std::string& s, const std::string& what )
{
  if ( s.empty() || !std::all_of( s.begin(), s.end(), []( char c ) { return c >= '0' && c <= '9'; } ) || s.size() > 19u )
    fail( error_kind::invalid_argument, what + ": expected a nonnegative integer, got '" + s + "'" );
  return std::stoull( s );
}

/*! "2..6" or "2,3,5" or "4". */
std::vector<unsigned> parse_range_list( const std::string& s, const std::string& what )
{
  std::vector<unsigned> out;
  if ( const auto dots = s.find( ".." ); dots != std::string::npos )
  {
    const auto lo = parse_u64( s.substr( 0, dots ), what ), hi = parse_u64( s.substr( dots + 2u ), what );
    if ( lo > hi || hi > 64u )
      fail( error_kind::invalid_argument, what + ": bad range '" + s + "'" );
    for ( auto v = lo; v <= hi; ++v )
      out.push_back( static_cast<unsigned>( v ) );
    return out;
  }
  for ( const auto& tok : split( s, ',' ) )
  {
    const auto v = parse_u64( tok, what );
    if ( v > 64u )
      fail( error_kind::invalid_argument, what + ": value too large" );
    out.push_back( static_cast<unsigned>( v ) );
  }
  if ( out.empty() )
    fail( error_kind::invalid_argument, what + " is empty" );
  return out;
}

std::vector<unsigned> parse_coords( const std::string& s )
{
  std::vector<unsigned> out;
  for ( const auto& tok : split( s, ',' ) )
    out.push_back( static_cast<unsigned>( parse_u64( tok, "--coords" ) ) );
  if ( out.empty() )
    fail( error_kind::invalid_trigger, "--coords is empty" );
  return out;
}

/*! Pattern bits in coordinate order, e.g. "10" sets the first trigger
    coordinate to 1 and the second to 0. */
std::uint64_t parse_pattern( const std::string& s, std::size_t t )
{
  if ( s.size() != t || !std::all_of( s.begin(), s.end(), []( char c ) { return c == '0' || c == '1'; } ) )
    fail( error_kind::invalid_trigger, "--pattern needs one 0/1 digit per trigger coordinate" );
  std::uint64_t idx = 0;
  for ( std::size_t k = 0; k < t; ++k )
    if ( s[k] == '1' )
      idx |= std::uint64_t{ 1 } << k;
  return idx;
}

std::string pattern_string( const trigger_spec& trig )
{
  std::string s;
  for ( bool b : trig.pattern )
    s.push_back( b ? '1' : '0' );
  return s;
}

enum class label_choice
{
  zero,
  one,
  majority
};

label_choice parse_label( const std::string& s )
{
  if ( s == "0" )
    return label_choice::zero;
  if ( s == "1" )
    return label_choice::one;
  if ( s == "majority" )
    return label_choice::majority;
  fail( error_kind::invalid_argument, "--label must be 0, 1 or majority" );
}

class_dialect parse_class_dialect( const std::string& s )
{
  if ( s == "tc0" )
    return class_dialect::restricted_threshold;
  if ( s == "ac0" )
    return class_dialect::ac0_depth2;
  fail( error_kind::invalid_argument, "--dialect must be tc0 or ac0 for finite classes" );
}

class_variant parse_variant( const std::string& s )
{
  if ( s == "base" )
    return class_variant::base;
  if ( s == "over" )
    return class_variant::overparametrized;
  fail( error_kind::invalid_argument, "--variant must be base or over" );
}

std::string read_file( const std::string& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    fail( error_kind::invalid_argument, "cannot open '" + path + "'" );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string points_string( std::span<const domain_point> pts )
{
  std::string s;
  for ( std::size_t i = 0; i < pts.size(); ++i )
    s += ( i ? " " : "" ) + std::to_string( pts[i] );
  return s;
}

std::string real_string( const hp_real& v )
{
  return v.str( 17 );
}

/* ---------------------------------------------------------------------------
 * Finite classes
 * ------------------------------------------------------------------------- */

hypothesis_class build_class( class_dialect d, unsigned n, class_variant v, const common_options& common, std::uint64_t* base_count = nullptr )
{
  enumeration_options opt;
  opt.jobs = common.jobs;
  opt.long_run = common.long_run;
  if ( v == class_variant::overparametrized )
  {
    auto over = enumerate_overparametrized( { d, n, v }, opt );
    if ( base_count )
      *base_count = over.base_count;
    return std::move( over.functions );
  }
  auto cls = enumerate_semantic_class( { d, n }, opt );
  if ( base_count )
    *base_count = cls.functions.size();
  return std::move( cls.functions );
}

truth_table parse_target( const std::string& s, unsigned n )
{
  if ( s == "or" )
    return truth_table::or_n( n );
  auto t = truth_table::from_hex( s );
  if ( t.arity() != n )
    fail( error_kind::arity_mismatch, "--target arity differs from --n" );
  return t;
}

/* ---------------------------------------------------------------------------
 * Subcommands
 * ------------------------------------------------------------------------- */

run_output run_enumerate( const std::string& dialect, const std::string& ns, const std::string& variant, bool count_only, unsigned shards, bool members,
                          const common_options& common )
{
  const auto d = parse_class_dialect( dialect );
  const auto v = parse_variant( variant );
  std::ostringstream csv;
  csv << "n,class_size,ceil_log2_class_size\n";
  run_output out;
  out.files.push_back( { "enumerate.csv", "" } );
  for ( auto n : parse_range_list( ns, "--n" ) )
  {
    std::uint64_t size = 0;
    if ( v == class_variant::overparametrized )
    {
      const auto h = build_class( d, n, v, common );
      size = h.size();
      if ( members )
      {
        std::ostringstream m;
        m << "member,table_hex\n";
        for ( std::size_t i = 0; i < h.size(); ++i )
          m << i << ',' << h.member( i ).to_hex() << '\n';
        out.files.push_back( { "members_n" + std::to_string( n ) + ".csv", m.str() } );
      }
    }
    else
    {
      enumeration_options opt;
      opt.jobs = common.jobs;
      opt.long_run = common.long_run;
      opt.count_only = count_only;
      opt.shards = shards;
      const auto cls = enumerate_semantic_class( { d, n }, opt );
      size = cls.semantic_count;
      if ( members && !count_only )
      {
        std::ostringstream m;
        m << "member,table_hex,grid_index\n";
        for ( std::size_t i = 0; i < cls.functions.size(); ++i )
          m << i << ',' << cls.functions.member( i ).to_hex() << ',' << cls.representatives[i] << '\n';
        out.files.push_back( { "members_n" + std::to_string( n ) + ".csv", m.str() } );
      }
    }
    csv << n << ',' << size << ',' << ceil_log2( size ) << '\n';
  }
  out.files[0].content = csv.str();
  return out;
}

run_output run_halve( const std::string& dialect, const std::string& ns, const common_options& common )
{
  const auto d = parse_class_dialect( dialect );
  run_output out;
  out.files.push_back( { "halving.csv", "" } );
  std::ostringstream csv;
  csv << "n,class_size,ceil_log2_class_size,target_cert_size,target_is_or,target_hex\n";
  json targets = json::array();
  for ( auto n : parse_range_list( ns, "--n" ) )
  {
    enumeration_options opt;
    opt.jobs = common.jobs;
    opt.long_run = common.long_run;
    const auto cls = enumerate_semantic_class( { d, n }, opt );
    const auto r = halving_certificate( cls.functions );
    if ( !is_certificate( cls.functions, r.target, r.sample ) )
      fail( error_kind::verification, "halving sample does not certify the selected target" );
    const bool is_or = r.target == truth_table::or_n( n );
    csv << n << ',' << cls.semantic_count << ',' << ceil_log2( cls.semantic_count ) << ',' << r.sample.points.size() << ',' << ( is_or ? 1 : 0 ) << ','
        << r.target.to_hex() << '\n';
    std::ostringstream trace;
    trace << "step,point,count_label0,count_label1,kept_label\n";
    for ( std::size_t s = 0; s < r.trace.size(); ++s )
      trace << s << ',' << r.trace[s].point << ',' << r.trace[s].count0 << ',' << r.trace[s].count1 << ',' << ( r.trace[s].kept ? 1 : 0 ) << '\n';
    out.files.push_back( { "trace_n" + std::to_string( n ) + ".csv", trace.str() } );
    targets.push_back( { { "n", n },
                         { "target_hex", r.target.to_hex() },
                         { "target_is_or", is_or },
                         { "sample", r.sample.points },
                         { "representative_circuit", write_circuit( cls.representative_circuit( r.selected ) ) } } );
  }
  out.files[0].content = csv.str();
  out.files.push_back( { "targets.json", targets.dump( 2 ) + "\n" } );
  return out;
}

run_output run_cert_min( const std::string& dialect, const std::string& ns, const std::string& variant, const std::string& target, std::uint64_t budget,
                         const common_options& common )
{
  const auto d = parse_class_dialect( dialect );
  const auto v = parse_variant( variant );
  std::ostringstream csv;
  csv << "n,variant,class_size,target_hex,cert_size,witness,search_nodes\n";
  for ( auto n : parse_range_list( ns, "--n" ) )
  {
    const auto h = build_class( d, n, v, common );
    const auto f = parse_target( target, n );
    const auto r = min_certificate( h, f, budget );
    if ( !is_certificate( h, f, r.witness ) )
      fail( error_kind::verification, "minimum certificate witness does not certify the target" );
    csv << n << ',' << variant << ',' << h.size() << ',' << f.to_hex() << ',' << r.size << ',' << points_string( r.witness.points ) << ',' << r.nodes << '\n';
  }
  return { { { "cert_min.csv", csv.str() } }, 0 };
}

/*! Base circuit from --circuit FILE or the OR preset of the dialect. */
any_circuit base_circuit( const std::string& dialect, unsigned n, const std::string& circuit_file )
{
  if ( !circuit_file.empty() )
    return read_circuit( read_file( circuit_file ) );
  if ( dialect == "tc0" )
    return or_threshold_depth2( n );
  if ( dialect == "ac0" || dialect == "ac0-same-depth" )
    return or_ac0( n );
  if ( dialect == "nc1" )
    return or_fanin2( n );
  if ( dialect == "restricted-tc0" )
  {
    const std::vector<int> ones( n, 1 ), zeros( n, 0 );
    return make_restricted_threshold( n, ones, 1, zeros, 1, 1 );
  }
  if ( dialect == "addition" )
    return addition_recognizer( n );
  fail( error_kind::invalid_argument, "--dialect must be tc0, ac0, ac0-same-depth, nc1, restricted-tc0 or addition" );
}

template<typename T>
const T& require_dialect( const any_circuit& c, const char* what )
{
  if ( !std::holds_alternative<T>( c ) )
    fail( error_kind::invalid_argument, std::string( "circuit file does not hold a " ) + what + " circuit" );
  return std::get<T>( c );
}

any_circuit apply_override( const std::string& dialect, const any_circuit& base, const trigger_spec& trig )
{
  if ( dialect == "tc0" || dialect == "addition" )
    return tc0_override( require_dialect<threshold_circuit>( base, "threshold" ), trig );
  if ( dialect == "restricted-tc0" )
    return restricted_tc0_override( require_dialect<threshold_circuit>( base, "threshold" ), trig );
  if ( dialect == "ac0" )
    return ac0_override( require_dialect<ac0_circuit>( base, "ac0" ), trig );
  if ( dialect == "ac0-same-depth" )
    return ac0_override_same_depth( require_dialect<ac0_circuit>( base, "ac0" ), trig );
  if ( dialect == "nc1" )
    return nc1_override( require_dialect<fanin2_circuit>( base, "fanin2" ), trig );
  fail( error_kind::invalid_argument, "unknown dialect '" + dialect + "'" );
}

trigger_spec make_cli_trigger( const std::vector<unsigned>& coords, const std::string& pattern, label_choice label, unsigned n, const truth_table* f )
{
  auto trig = make_trigger( coords, parse_pattern( pattern, coords.size() ), label == label_choice::one );
  trig.validate( n );
  if ( label == label_choice::majority )
  {
    if ( !f )
      fail( error_kind::resource_budget, "majority label needs the base truth table (n <= 24)" );
    trig = with_majority_label( trig, *f );
  }
  return trig;
}

run_output run_deceive( const std::string& dialect, unsigned n, const std::string& circuit_file, const std::string& coords_s, const std::string& pattern,
                        const std::string& label_s )
{
  const auto base = base_circuit( dialect, n, circuit_file );
  const auto arity = arity_of( base );
  trigger_spec trig;
  if ( dialect == "addition" )
  {
    if ( !coords_s.empty() )
      fail( error_kind::invalid_argument, "addition triggers always use the a-coordinates; give --pattern only" );
    if ( pattern.size() != n )
      fail( error_kind::invalid_trigger, "--pattern needs n digits for the addition family" );
    trig = addition_trigger( n, parse_pattern( pattern, n ) );
  }
  else
  {
    std::optional<truth_table> f;
    const auto label = parse_label( label_s );
    if ( label == label_choice::majority && arity <= max_circuit_table_arity )
      f = compute_truth_table( base );
    trig = make_cli_trigger( parse_coords( coords_s ), pattern, label, arity, f ? &*f : nullptr );
  }
  const auto g = apply_override( dialect, base, trig );
  const auto sb = size_and_depth( base ), sg = size_and_depth( g );
  json summary{ { "dialect", dialect },
                { "arity", arity },
                { "trigger", { { "coords", trig.coords }, { "pattern", pattern_string( trig ) }, { "label", trig.override_label ? 1 : 0 } } },
                { "base", { { "size", sb.size }, { "depth", sb.depth } } },
                { "deceiver", { { "size", sg.size }, { "depth", sg.depth } } } };
  if ( arity <= max_circuit_table_arity )
  {
    const auto fb = compute_truth_table( base ), fg = compute_truth_table( g );
    const auto e = compute_disagreement( fg, fb );
    bool ok = true;
    for ( domain_point x = 0; x < fb.num_bits() && ok; ++x )
      ok = fg.bit( x ) == ( block_membership( x, trig, arity ) ? trig.override_label : fb.bit( x ) );
    summary["block_size"] = block_size( trig, arity );
    summary["disagreement_count"] = e.size();
    summary["verified"] = ok;
    if ( !ok )
      fail( error_kind::verification, "override does not match the base off the block or the label on it" );
  }
  else
    summary["verified"] = nullptr;
  std::ostringstream csv;
  csv << "dialect,arity,coords,pattern,label,base_size,base_depth,deceiver_size,deceiver_depth,disagreement_count\n";
  std::string coords_text;
  for ( std::size_t k = 0; k < trig.coords.size(); ++k )
    coords_text += ( k ? " " : "" ) + std::to_string( trig.coords[k] );
  csv << dialect << ',' << arity << ',' << coords_text << ',' << pattern_string( trig ) << ',' << ( trig.override_label ? 1 : 0 ) << ',' << sb.size << ','
      << sb.depth << ',' << sg.size << ',' << sg.depth << ',' << ( summary.contains( "disagreement_count" ) ? std::to_string( summary["disagreement_count"].get<std::uint64_t>() ) : "" )
      << '\n';
  return { { { "deceive.csv", csv.str() }, { "deceiver.circuit", write_circuit( g ) }, { "summary.json", summary.dump( 2 ) + "\n" } }, 0 };
}

/*! Majority-label overrides of `base` over every pattern on the coordinates. */
std::vector<truth_table> majority_family( const std::string& dialect, const any_circuit& base, const truth_table& f, const std::vector<unsigned>& coords )
{
  if ( coords.size() > 16u )
    fail( error_kind::resource_budget, "at most 16 trigger coordinates" );
  std::vector<truth_table> out;
  for ( std::uint64_t pi = 0; pi < ( std::uint64_t{ 1 } << coords.size() ); ++pi )
  {
    auto trig = make_trigger( coords, pi );
    trig.validate( f.arity() );
    trig = with_majority_label( trig, f );
    out.push_back( compute_truth_table( apply_override( dialect, base, trig ) ) );
  }
  return out;
}

run_output run_lower_bound( const std::string& dialect, unsigned n, const std::string& circuit_file, const std::string& coords_s, const std::string& over_class,
                            std::uint64_t budget, const common_options& common )
{
  if ( !over_class.empty() )
  {
    const auto d = parse_class_dialect( over_class );
    std::uint64_t base_count = 0;
    const auto h = build_class( d, n, class_variant::overparametrized, common, &base_count );
    const auto f = truth_table::or_n( n );
    std::vector<truth_table> singles;
    for ( domain_point x = 0; x < f.num_bits(); ++x )
    {
      auto g = f;
      g.set_bit( x, !f.bit( x ) );
      if ( !h.contains( g ) )
        fail( error_kind::verification, "overparametrized class misses a singleton deceiver" );
      singles.push_back( g );
    }
    const auto lb = disjoint_block_lower_bound( f, singles );
    std::ostringstream csv;
    csv << "n,class,class_size,base_size,disjoint_lower_bound,min_cert_size\n";
    std::string cert = "";
    try
    {
      cert = std::to_string( min_certificate( h, f, budget ).size );
    }
    catch ( const budget_error& e )
    {
      cert = ">=" + std::to_string( e.lower_bound() );
    }
    csv << n << ',' << over_class << "-over," << h.size() << ',' << base_count << ',' << lb << ',' << cert << '\n';
    return { { { "lower_bound.csv", csv.str() } }, 0 };
  }
  const auto base = base_circuit( dialect, n, circuit_file );
  if ( arity_of( base ) > max_circuit_table_arity )
    fail( error_kind::resource_budget, "lower-bound needs truth tables (arity <= 24)" );
  const auto f = compute_truth_table( base );
  const auto coords = parse_coords( coords_s );
  const auto family = majority_family( dialect, base, f, coords );
  const auto lb = disjoint_block_lower_bound( f, family );
  std::ostringstream csv;
  csv << "dialect,n,t,deceivers,lower_bound\n";
  csv << dialect << ',' << f.arity() << ',' << coords.size() << ',' << family.size() << ',' << lb << '\n';
  return { { { "lower_bound.csv", csv.str() } }, 0 };
}

run_output run_approx_cert( const std::string& dialect, unsigned n, const std::string& circuit_file, const std::string& coords_s, const std::string& mode_s,
                            double tolerance, std::uint64_t budget )
{
  error_mode mode;
  if ( mode_s == "absolute" )
    mode = error_mode::absolute;
  else if ( mode_s == "normalized" )
    mode = error_mode::normalized;
  else
    fail( error_kind::invalid_argument, "--mode must be absolute or normalized" );
  const auto base = base_circuit( dialect, n, circuit_file );
  if ( arity_of( base ) > 16u )
    fail( error_kind::resource_budget, "approx-cert is limited to arity 16" );
  const auto f = compute_truth_table( base );
  const auto coords = parse_coords( coords_s );
  hypothesis_class h( f.arity() );
  h.insert( f );
  for ( const auto& g : majority_family( dialect, base, f, coords ) )
    h.insert( g );
  const auto r = approx_min_certificate( h, f, tolerance, mode, budget );
  std::ostringstream csv;
  csv << "dialect,n,t,class_size,mode,tolerance,cert_size,witness\n";
  csv << dialect << ',' << f.arity() << ',' << coords.size() << ',' << h.size() << ',' << mode_s << ',' << tolerance << ',' << r.size << ','
      << points_string( r.witness.points ) << '\n';
  return { { { "approx_cert.csv", csv.str() } }, 0 };
}

std::vector<size_exponent> parse_size_exponents( const std::string& s )
{
  if ( s.empty() )
    return default_size_exponents();
  // 2^0.25n..2^n: the default exponents inside the range
  if ( const auto dots = s.find( ".." ); dots != std::string::npos )
  {
    auto bound = [&]( std::string b ) {
      if ( b.rfind( "2^", 0 ) != 0 || b.empty() || b.back() != 'n' )
        fail( error_kind::parse, "--sizes range ends look like 2^0.25n or 2^n" );
      b = b.substr( 2, b.size() - 3u );
      return b.empty() ? size_exponent::parse( "1" ) : size_exponent::parse( b );
    };
    const auto lo = bound( s.substr( 0, dots ) ), hi = bound( s.substr( dots + 2u ) );
    std::vector<size_exponent> out;
    for ( const auto& r : default_size_exponents() )
      if ( r.num * lo.den >= lo.num * r.den && r.num * hi.den <= hi.num * r.den )
        out.push_back( r );
    return out;
  }
  std::vector<size_exponent> out;
  for ( const auto& tok : split( s, ',' ) )
    out.push_back( size_exponent::parse( tok ) );
  return out;
}

std::vector<big_int> parse_m_list( const std::string& s, const big_int& population )
{
  std::vector<big_int> out;
  if ( s.empty() )
  {
    for ( big_int m = 1; m < population; m *= 2 )
      out.push_back( m );
    out.insert( out.begin(), big_int( 0 ) );
    out.push_back( population );
    return out;
  }
  for ( const auto& tok : split( s, ',' ) )
  {
    if ( !std::all_of( tok.begin(), tok.end(), []( char c ) { return c >= '0' && c <= '9'; } ) )
      fail( error_kind::invalid_argument, "--m entries must be nonnegative integers" );
    out.emplace_back( tok );
  }
  return out;
}

std::string curve_csv( const error_profile& p, const std::vector<big_int>& ms, const survival_options& opt )
{
  std::ostringstream csv;
  csv << "m,expected_survivors\n";
  for ( const auto& m : ms )
    csv << m << ',' << real_string( expected_survivors( p, m, opt ).value ) << '\n';
  return csv.str();
}

/*! Targeted points of `pairs` distinct operand pairs drawn with the seed
    (all pairs when `pairs` covers the domain). */
std::vector<domain_point> targeted_addition_subset( unsigned n, std::uint64_t pairs, std::uint64_t seed )
{
  if ( n < 2u || n > 12u )
    fail( error_kind::resource_budget, "--targeted-pairs supports operand length 2..12" );
  const std::uint64_t total = std::uint64_t{ 1 } << ( 2u * n );
  if ( pairs > total )
    fail( error_kind::invalid_argument, "--targeted-pairs exceeds the number of operand pairs" );
  std::vector<std::uint64_t> ids( total );
  std::iota( ids.begin(), ids.end(), std::uint64_t{ 0 } );
  if ( pairs < total )
  {
    std::mt19937_64 rng( seed );
    for ( std::uint64_t i = 0; i < pairs; ++i )
      std::swap( ids[i], ids[i + rng() % ( total - i )] );
    ids.resize( pairs );
  }
  const auto inside = targeted_addition_predicate( n );
  const std::uint64_t mask = ( std::uint64_t{ 1 } << n ) - 1u;
  std::vector<domain_point> pts;
  for ( auto id : ids )
    for ( auto x : addition_held_out_points( n, id & mask, id >> n ) )
      if ( inside( x ) )
        pts.push_back( x );
  std::sort( pts.begin(), pts.end() );
  return pts;
}

std::string heatmap_csv( std::span<const unsigned> ns, std::span<const size_exponent> exps )
{
  std::ostringstream heat;
  heat << "n,size_exponent,m,remaining\n";
  for ( const auto& c : elimination_heatmap( ns, exps ) )
    heat << c.n << ',' << c.exponent.text << ',' << c.m << ',' << c.remaining << '\n';
  return heat.str();
}

run_output run_survivors( const std::string& profile_file, unsigned addition_n, const std::string& m_list, const std::string& sizes, const std::string& lengths,
                          const std::string& subset_file, std::uint64_t targeted_pairs, bool write_profile, const common_options& common )
{
  survival_options opt;
  opt.jobs = common.jobs;
  run_output out;
  const auto exps = parse_size_exponents( sizes );
  const bool restrict = !subset_file.empty() || targeted_pairs > 0u;
  if ( addition_n > 0u && !profile_file.empty() )
    fail( error_kind::invalid_argument, "give either --profile or --constructed-addition" );

  if ( addition_n == 0u && profile_file.empty() )
  {
    if ( lengths.empty() )
      fail( error_kind::invalid_argument, "survivors needs --profile, --constructed-addition or --heatmap-lengths" );
    const auto ns = parse_range_list( lengths, "--heatmap-lengths" );
    out.files.push_back( { "heatmap.csv", heatmap_csv( ns, exps ) } );
    return out;
  }

  error_profile p;
  if ( addition_n > 0u )
  {
    const auto q = addition_population( addition_n );
    std::ostringstream curve;
    curve << "m,expected_survivors\n";
    for ( const auto& m : parse_m_list( m_list, q ) )
      curve << m << ',' << real_string( constructed_addition_expected_survivors( addition_n, m, opt ) ) << '\n';
    out.files.push_back( { "curve.csv", curve.str() } );
    std::vector<unsigned> ns{ addition_n };
    if ( !lengths.empty() )
      ns = parse_range_list( lengths, "--heatmap-lengths" );
    out.files.push_back( { "heatmap.csv", heatmap_csv( ns, exps ) } );
    if ( !restrict && !write_profile )
      return out;
    p = constructed_addition_profile( addition_n, restrict || addition_n <= 6u );
    if ( write_profile )
    {
      std::ostringstream ps;
      write_error_profile( ps, p );
      out.files.push_back( { "profile.txt", ps.str() } );
    }
    if ( !restrict )
      return out;
  }
  else
  {
    std::istringstream in( read_file( profile_file ) );
    p = read_error_profile( in );
    out.files.push_back( { "curve.csv", curve_csv( p, parse_m_list( m_list, p.population ), opt ) } );
    if ( !restrict )
      return out;
  }

  std::vector<domain_point> pts;
  if ( !subset_file.empty() )
  {
    std::istringstream sin( read_file( subset_file ) );
    std::string tok;
    while ( sin >> tok )
      pts.push_back( parse_u64( tok, "subset point" ) );
    std::sort( pts.begin(), pts.end() );
    pts.erase( std::unique( pts.begin(), pts.end() ), pts.end() );
  }
  else
  {
    const auto parts = split( p.domain, ' ' );
    if ( parts.size() != 2u || parts[0] != "addition" )
      fail( error_kind::capability, "--targeted-pairs needs a profile with domain 'addition <n>'" );
    pts = targeted_addition_subset( static_cast<unsigned>( parse_u64( parts[1], "domain operand length" ) ), targeted_pairs, common.seed );
  }
  const auto r = restrict_to_subset( p, pts );
  json cov{ { "subset_size", r.profile.population.str() },
            { "unique_errors", r.unique_errors },
            { "unique_errors_inside", r.unique_inside },
            { "unique_coverage", r.unique_coverage() },
            { "error_mass", r.error_mass.str() },
            { "error_mass_inside", r.error_mass_inside.str() },
            { "mass_coverage", r.mass_coverage() } };
  json unkillable = json::array();
  for ( std::size_t i = 0; i < r.unkillable.size(); ++i )
    if ( r.unkillable[i] )
      unkillable.push_back( p.entries[i].id );
  cov["unkillable"] = unkillable;
  out.files.push_back( { "subset_curve.csv", curve_csv( r.profile, parse_m_list( m_list, r.profile.population ), opt ) } );
  out.files.push_back( { "coverage.json", cov.dump( 2 ) + "\n" } );
  return out;
}

run_output run_ahat_override( const std::string& model_file, unsigned n, const std::string& coords_s, const std::string& pattern, const std::string& label_s,
                              const std::string& verify_range, const common_options& common )
{
  ahat_transformer base;
  run_output out;
  if ( !model_file.empty() )
    base = ahat_from_json( json::parse( read_file( model_file ), nullptr, true, false ) );
  else
  {
    if ( n == 0u )
      fail( error_kind::invalid_argument, "ahat-override needs --model or --n with --seed" );
    base = random_ahat_model( common.seed, n );
  }
  const auto label = parse_label( label_s );
  std::optional<truth_table> f;
  if ( label == label_choice::majority && base.n <= 20u )
    f = compute_truth_table( base, common.jobs );
  const auto trig = make_cli_trigger( parse_coords( coords_s ), pattern, label, base.n, f ? &*f : nullptr );
  const auto over = block_override( base, trig );

  domain_point lo = 0, hi = domain_point{ 1 } << base.n;
  if ( !verify_range.empty() )
  {
    const auto dots = verify_range.find( ".." );
    if ( dots == std::string::npos )
      fail( error_kind::invalid_argument, "--verify-range looks like LO..HI" );
    lo = parse_u64( verify_range.substr( 0, dots ), "--verify-range" );
    hi = std::min( hi, parse_u64( verify_range.substr( dots + 2u ), "--verify-range" ) );
  }
  const auto rep = verify_block_override( base, over, trig, lo, hi, common.jobs );
  json report{ { "n", base.n },
               { "precision", base.fp.precision() },
               { "layer_norm_fixed_points", verify_layer_norm_fixed_points( base.fp ) },
               { "trigger", { { "coords", trig.coords }, { "pattern", pattern_string( trig ) }, { "label", trig.override_label ? 1 : 0 } } },
               { "base_dim", base.dim },
               { "override_dim", over.dim },
               { "verify_from", lo },
               { "verify_to", hi },
               { "checked", rep.checked },
               { "off_block_mismatches", rep.off_block_mismatches },
               { "on_block_mismatches", rep.on_block_mismatches },
               { "passed", rep.passed() } };
  std::ostringstream csv;
  csv << "n,t,label,checked,off_block_mismatches,on_block_mismatches,passed\n";
  csv << base.n << ',' << trig.coords.size() << ',' << ( trig.override_label ? 1 : 0 ) << ',' << rep.checked << ',' << rep.off_block_mismatches << ','
      << rep.on_block_mismatches << ',' << ( rep.passed() ? 1 : 0 ) << '\n';
  out.files.push_back( { "ahat_override.csv", csv.str() } );
  out.files.push_back( { "report.json", report.dump( 2 ) + "\n" } );
  out.files.push_back( { "override_model.json", to_json( over ).dump() + "\n" } );
  if ( model_file.empty() )
    out.files.push_back( { "base_model.json", to_json( base ).dump() + "\n" } );
  if ( !rep.passed() )
  {
    // still emit the artifacts before failing
    throw std::pair<run_output, std::string>( out, "override disagrees with the base off the block or with the label on it" );
  }
  return out;
}

/* ---------------------------------------------------------------------------
 * Output and errors
 * ------------------------------------------------------------------------- */

int exit_code( error_kind k )
{
  switch ( k )
  {
  case error_kind::resource_budget: return 3;
  case error_kind::verification:
  case error_kind::invalid_deceiver:
  case error_kind::overlap: return 4;
  default: return 2;
  }
}

void print_error( const std::string& kind, const std::string& message, const json& extra = json::object() )
{
  json e{ { "error", { { "kind", kind }, { "message", message } } } };
  for ( auto it = extra.begin(); it != extra.end(); ++it )
    e["error"][it.key()] = it.value();
  std::cerr << e.dump() << std::endl;
}

void emit( const run_output& out, const std::string& subcommand, const json& config, const common_options& common, double seconds )
{
  if ( !out.files.empty() )
    std::cout << out.files[out.primary].content << std::flush;
  if ( common.out_dir.empty() )
    return;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories( common.out_dir, ec );
  if ( ec )
    fail( error_kind::invalid_argument, "cannot create output directory '" + common.out_dir + "'" );
  json files = json::array();
  for ( const auto& a : out.files )
  {
    std::ofstream f( fs::path( common.out_dir ) / a.name, std::ios::binary );
    f << a.content;
    if ( !f )
      fail( error_kind::invalid_argument, "cannot write '" + a.name + "'" );
    files.push_back( { { "name", a.name }, { "bytes", a.content.size() } } );
  }
  json manifest{ { "tool", "certlab" },
                 { "version", certlab_version },
                 { "subcommand", subcommand },
                 { "config", config },
                 { "artifacts", files },
                 { "build", { { "compiler", __VERSION__ }, { "boost", BOOST_LIB_VERSION }, { "cli11", CLI11_VERSION } } },
                 { "timing", { { "wall_seconds", seconds } } } };
  std::ofstream m( fs::path( common.out_dir ) / "manifest.json", std::ios::binary );
  m << manifest.dump( 2 ) << '\n';
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "certlab: certification-hardness laboratory" };
  app.require_subcommand( 1 );
  app.fallthrough();
  common_options common;
  app.add_option( "--out", common.out_dir, "Write artifacts and manifest.json into this directory" );
  app.add_option( "--jobs", common.jobs, "Worker threads" )->check( CLI::Range( 1u, 256u ) );
  app.add_option( "--seed", common.seed, "Seed for generated models" );
  app.add_flag( "--long-run", common.long_run, "Allow threshold enumeration at n >= 7" );

  std::string dialect = "tc0", ns = "2", variant = "base", target = "or", circuit_file, coords, pattern, label = "majority", over_class, mode = "absolute",
              profile, m_list, sizes, lengths, subset_file, model_file, verify_range;
  unsigned n = 0, shards = 0, addition_n = 0;
  bool count_only = false, members = false, write_profile = false;
  std::uint64_t budget = default_search_budget, targeted_pairs = 0;
  double tolerance = 0.0;

  auto* enumerate = app.add_subcommand( "enumerate", "Semantic class sizes (n, |H|, ceil log2 |H|)" );
  enumerate->add_option( "--dialect", dialect, "tc0 (restricted threshold) or ac0" );
  enumerate->add_option( "--n", ns, "Input length, list (2,3) or range (2..6)" );
  enumerate->add_option( "--variant", variant, "base or over" );
  enumerate->add_flag( "--count-only", count_only, "Do not keep members" );
  enumerate->add_option( "--shards", shards, "Hash shards for count-only runs" );
  enumerate->add_flag( "--members", members, "Also write the member tables" );

  auto* halve = app.add_subcommand( "halve", "Deterministic halving: selected target and trace" );
  halve->add_option( "--dialect", dialect, "tc0 or ac0" );
  halve->add_option( "--n", ns, "Input length, list or range" );

  auto* cert_min = app.add_subcommand( "cert-min", "Exact minimum certificate of a target" );
  cert_min->add_option( "--dialect", dialect, "tc0 or ac0" );
  cert_min->add_option( "--n", ns, "Input length, list or range" );
  cert_min->add_option( "--variant", variant, "base or over" );
  cert_min->add_option( "--target", target, "or, or a table as <n>:<hex>" );
  cert_min->add_option( "--budget", budget, "Search node budget" );

  auto* deceive = app.add_subcommand( "deceive", "Build a block-override circuit" );
  deceive->add_option( "--dialect", dialect, "tc0, ac0, ac0-same-depth, nc1, restricted-tc0 or addition" )->required();
  deceive->add_option( "--n", n, "Input length (operand length for addition)" )->required();
  deceive->add_option( "--circuit", circuit_file, "Base circuit file (default: OR preset)" );
  deceive->add_option( "--coords", coords, "Trigger coordinates, e.g. 1,3" );
  deceive->add_option( "--pattern", pattern, "Pattern digits in coordinate order" )->required();
  deceive->add_option( "--label", label, "0, 1 or majority" );

  auto* lower = app.add_subcommand( "lower-bound", "Disjoint-block lower bound" );
  lower->add_option( "--dialect", dialect, "tc0, ac0, nc1 or restricted-tc0" );
  lower->add_option( "--n", n, "Input length" )->required();
  lower->add_option( "--circuit", circuit_file, "Base circuit file (default: OR preset)" );
  lower->add_option( "--coords", coords, "Trigger coordinates" );
  lower->add_option( "--over-class", over_class, "tc0 or ac0: singleton deceivers of OR_n in the overparametrized class" );
  lower->add_option( "--budget", budget, "Search node budget for the exact certificate" );

  auto* surv = app.add_subcommand( "survivors", "Expected survivors and the elimination heatmap" );
  surv->add_option( "--profile", profile, "Error-profile file" );
  surv->add_option( "--constructed-addition", addition_n, "Operand length of the constructed addition family" );
  surv->add_option( "--m", m_list, "Sample sizes (default: powers of two up to |Q|)" );
  surv->add_option( "--sizes", sizes, "Size exponents: list (0.25,0.5) or range 2^0.25n..2^n" );
  surv->add_option( "--heatmap-lengths", lengths, "Operand lengths of heatmap rows" );
  surv->add_option( "--subset-file", subset_file, "Points of the subset Q'" );
  surv->add_option( "--targeted-pairs", targeted_pairs, "Held-out operand pairs for the targeted subset (drawn with --seed)" );
  surv->add_flag( "--write-profile", write_profile, "Also write the constructed profile file" );

  auto* ahat = app.add_subcommand( "ahat-override", "Transformer block override with exhaustive check" );
  ahat->add_option( "--model", model_file, "Base model JSON (default: seeded random model)" );
  ahat->add_option( "--n", n, "Input length of the random model" );
  ahat->add_option( "--coords", coords, "Trigger coordinates" )->required();
  ahat->add_option( "--pattern", pattern, "Pattern digits" )->required();
  ahat->add_option( "--label", label, "0, 1 or majority" );
  ahat->add_option( "--verify-range", verify_range, "Inputs LO..HI to check (default all)" );

  auto* approx = app.add_subcommand( "approx-cert", "Approximate certificate against majority block deceivers" );
  approx->add_option( "--dialect", dialect, "tc0, ac0, nc1 or restricted-tc0" );
  approx->add_option( "--n", n, "Input length" )->required();
  approx->add_option( "--circuit", circuit_file, "Base circuit file (default: OR preset)" );
  approx->add_option( "--coords", coords, "Trigger coordinates" )->required();
  approx->add_option( "--mode", mode, "absolute (R) or normalized (epsilon)" );
  approx->add_option( "--tolerance", tolerance, "R or epsilon" )->required();
  approx->add_option( "--budget", budget, "Search node budget" );

  try
  {
    app.parse( argc, argv );
  }
  catch ( const CLI::CallForHelp& e )
  {
    return app.exit( e );
  }
  catch ( const CLI::CallForAllHelp& e )
  {
    return app.exit( e );
  }
  catch ( const CLI::ParseError& e )
  {
    print_error( "config", e.what() );
    return 2;
  }

  const auto* sub = app.get_subcommands().front();
  json config{ { "jobs", common.jobs }, { "seed", common.seed }, { "long_run", common.long_run } };
  for ( const auto* opt : sub->get_options() )
    if ( opt->count() > 0u && opt->get_name() != "--help" )
      config[opt->get_name()] = opt->as<std::string>();

  const auto start = std::chrono::steady_clock::now();
  try
  {
    run_output out;
    const std::string name = sub->get_name();
    if ( sub == enumerate )
      out = run_enumerate( dialect, ns, variant, count_only, shards, members, common );
    else if ( sub == halve )
      out = run_halve( dialect, ns, common );
    else if ( sub == cert_min )
      out = run_cert_min( dialect, ns, variant, target, budget, common );
    else if ( sub == deceive )
      out = run_deceive( dialect, n, circuit_file, coords, pattern, label );
    else if ( sub == lower )
      out = run_lower_bound( dialect, n, circuit_file, coords, over_class, budget, common );
    else if ( sub == surv )
      out = run_survivors( profile, addition_n, m_list, sizes, lengths, subset_file, targeted_pairs, write_profile, common );
    else if ( sub == ahat )
      out = run_ahat_override( model_file, n, coords, pattern, label, verify_range, common );
    else
      out = run_approx_cert( dialect, n, circuit_file, coords, mode, tolerance, budget );
    const double secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    emit( out, name, config, common, secs );
    return 0;
  }
  catch ( const std::pair<run_output, std::string>& partial )
  {
    try
    {
      emit( partial.first, sub->get_name(), config, common, 0.0 );
    }
    catch ( const certlab_error& )
    {
    }
    print_error( "verification", partial.second );
    return 4;
  }
  catch ( const budget_error& e )
  {
    print_error( to_string( e.kind() ), e.what(), { { "lower_bound", e.lower_bound() } } );
    return 3;
  }
  catch ( const certlab_error& e )
  {
    print_error( to_string( e.kind() ), e.what() );
    return exit_code( e.kind() );
  }
  catch ( const json::exception& e )
  {
    print_error( "parse", e.what() );
    return 2;
  }
  catch ( const std::bad_alloc& )
  {
    print_error( "resource_budget", "out of memory" );
    return 3;
  }
  catch ( const std::exception& e )
  {
    print_error( "internal", e.what() );
    return 2;
  }
}
