#pragma once

#include <string>

#include <json.hpp>

#include "ahat.hpp"

namespace certlab
{

/*! \brief JSON form of an AHAT model; every scalar is its D_p bit pattern
    as a hex string, so a round trip is bit-exact.

      { "format": {"exp_bits": 4, "man_bits": 3}, "n": .., "dim": ..,
        "embedding": [[vec per position] for token 0, for token 1],
        "layers": [{"heads": [{"proj", "wq", "bq", "wk", "bk", "wv", "bv",
                               "wo", "score_scale"}],
                    "ff": {"proj", "w1", "b1", "w2", "b2"}}],
        "readout": {"a", "b", "override_terms": [{"coord", "coefficient"}]} }
*/
inline nlohmann::json to_json( const ahat_transformer& t )
{
  using nlohmann::json;
  const auto& fp = t.fp;
  auto vec = [&]( const fp_vector& v ) {
    json a = json::array();
    for ( auto x : v )
      a.push_back( fp.to_hex( x ) );
    return a;
  };
  auto mat = [&]( const fp_matrix& m ) {
    json a = json::array();
    for ( const auto& r : m )
      a.push_back( vec( r ) );
    return a;
  };
  json j;
  j["format"] = { { "exp_bits", fp.exp_bits() }, { "man_bits", fp.man_bits() } };
  j["n"] = t.n;
  j["dim"] = t.dim;
  j["embedding"] = json::array();
  for ( const auto& per_token : t.embedding )
    j["embedding"].push_back( mat( per_token ) );
  j["layers"] = json::array();
  for ( const auto& layer : t.layers )
  {
    json l;
    l["heads"] = json::array();
    for ( const auto& h : layer.heads )
      l["heads"].push_back( { { "proj", mat( h.proj ) },
                              { "wq", mat( h.wq ) },
                              { "bq", vec( h.bq ) },
                              { "wk", mat( h.wk ) },
                              { "bk", vec( h.bk ) },
                              { "wv", mat( h.wv ) },
                              { "bv", vec( h.bv ) },
                              { "wo", mat( h.wo ) },
                              { "score_scale", fp.to_hex( h.score_scale ) } } );
    l["ff"] = { { "proj", mat( layer.ff.proj ) }, { "w1", mat( layer.ff.w1 ) }, { "b1", vec( layer.ff.b1 ) }, { "w2", mat( layer.ff.w2 ) }, { "b2", vec( layer.ff.b2 ) } };
    j["layers"].push_back( std::move( l ) );
  }
  json terms = json::array();
  for ( const auto& term : t.readout.override_terms )
    terms.push_back( { { "coord", term.coord }, { "coefficient", fp.to_hex( term.coefficient ) } } );
  j["readout"] = { { "a", vec( t.readout.a ) }, { "b", fp.to_hex( t.readout.b ) }, { "override_terms", terms } };
  return j;
}

inline ahat_transformer ahat_from_json( const nlohmann::json& j )
{
  try
  {
    ahat_transformer t;
    t.fp = fixed_precision( j.at( "format" ).at( "exp_bits" ).get<unsigned>(), j.at( "format" ).at( "man_bits" ).get<unsigned>() );
    const auto& fp = t.fp;
    auto vec = [&]( const nlohmann::json& a ) {
      fp_vector v;
      for ( const auto& x : a )
        v.push_back( fp.from_hex( x.get<std::string>() ) );
      return v;
    };
    auto mat = [&]( const nlohmann::json& a ) {
      fp_matrix m;
      for ( const auto& r : a )
        m.push_back( vec( r ) );
      return m;
    };
    t.n = j.at( "n" ).get<unsigned>();
    t.dim = j.at( "dim" ).get<std::size_t>();
    const auto& emb = j.at( "embedding" );
    if ( emb.size() != 2u )
      fail( error_kind::parse, "embedding needs two token tables" );
    for ( std::size_t a = 0; a < 2u; ++a )
      t.embedding[a] = mat( emb[a] );
    for ( const auto& l : j.at( "layers" ) )
    {
      ahat_layer layer;
      for ( const auto& h : l.at( "heads" ) )
      {
        ahat_head head;
        head.proj = mat( h.at( "proj" ) );
        head.wq = mat( h.at( "wq" ) );
        head.bq = vec( h.at( "bq" ) );
        head.wk = mat( h.at( "wk" ) );
        head.bk = vec( h.at( "bk" ) );
        head.wv = mat( h.at( "wv" ) );
        head.bv = vec( h.at( "bv" ) );
        head.wo = mat( h.at( "wo" ) );
        head.score_scale = fp.from_hex( h.at( "score_scale" ).get<std::string>() );
        layer.heads.push_back( std::move( head ) );
      }
      const auto& ff = l.at( "ff" );
      layer.ff.proj = mat( ff.at( "proj" ) );
      layer.ff.w1 = mat( ff.at( "w1" ) );
      layer.ff.b1 = vec( ff.at( "b1" ) );
      layer.ff.w2 = mat( ff.at( "w2" ) );
      layer.ff.b2 = vec( ff.at( "b2" ) );
      t.layers.push_back( std::move( layer ) );
    }
    const auto& r = j.at( "readout" );
    t.readout.a = vec( r.at( "a" ) );
    t.readout.b = fp.from_hex( r.at( "b" ).get<std::string>() );
    if ( r.contains( "override_terms" ) )
      for ( const auto& term : r.at( "override_terms" ) )
        t.readout.override_terms.push_back( { term.at( "coord" ).get<std::size_t>(), fp.from_hex( term.at( "coefficient" ).get<std::string>() ) } );
    t.validate();
    return t;
  }
  catch ( const nlohmann::json::exception& e )
  {
    fail( error_kind::parse, std::string( "model JSON: " ) + e.what() );
  }
}

} // namespace certlab
