#pragma once

#include "netlist.hpp"

#include <json.hpp>

#include <sstream>
#include <string>

namespace qdi
{

class format_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json( netlist const& n )
{
  nlohmann::json gates = nlohmann::json::array();
  for ( auto const& g : n.gates() )
  {
    gates.push_back( { { "id", g.id },
                       { "kind", std::string( to_string( g.kind ) ) },
                       { "inputs", g.inputs },
                       { "output", g.output },
                       { "init", g.init ? 1 : 0 } } );
  }
  nlohmann::json ports = nlohmann::json::array();
  for ( auto const& p : n.ports() )
  {
    nlohmann::json jp{ { "name", p.name },
                       { "dir", p.is_input() ? "input" : "output" },
                       { "rail1", p.rail1 },
                       { "rail0", p.rail0 } };
    if ( p.const_value )
      jp["const_value"] = *p.const_value ? 1 : 0;
    ports.push_back( std::move( jp ) );
  }
  nlohmann::json doc{ { "name", n.name() }, { "net_count", n.net_count() }, { "gates", std::move( gates ) }, { "ports", std::move( ports ) } };
  if ( !n.metadata().empty() )
    doc["metadata"] = n.metadata();
  return doc;
}

inline std::string serialize( netlist const& n )
{
  return to_json( n ).dump( 2 ) + "\n";
}

namespace detail
{

inline bool read_bit( nlohmann::json const& v, char const* what )
{
  if ( v.is_boolean() )
    return v.get<bool>();
  if ( v.is_number_integer() && ( v.get<int>() == 0 || v.get<int>() == 1 ) )
    return v.get<int>() == 1;
  throw format_error( std::string( "expected a bit for " ) + what );
}

} // namespace detail

/// Parses a netlist document. Checks format-level rules only (kinds, arity, net
/// references); structural rules are left to `validate`.
inline netlist from_json( nlohmann::json const& doc )
{
  try
  {
    if ( !doc.is_object() )
      throw format_error( "netlist document must be a JSON object" );
    auto const net_count = doc.at( "net_count" ).get<std::size_t>();
    auto check = [&]( net_id id, std::string const& where ) {
      if ( id >= net_count )
        throw format_error( "dangling reference: " + where + " uses net " + std::to_string( id ) + " of " + std::to_string( net_count ) );
    };

    std::vector<gate> gates;
    for ( auto const& jg : doc.at( "gates" ) )
    {
      gate g;
      g.id = jg.at( "id" ).get<gate_id>();
      if ( g.id != gates.size() )
        throw format_error( "gate ids must be dense and in order; found " + std::to_string( g.id ) );
      auto const kind_name = jg.at( "kind" ).get<std::string>();
      auto kind = parse_gate_kind( kind_name );
      if ( !kind )
        throw format_error( "unknown gate kind \"" + kind_name + "\"" );
      g.kind = *kind;
      g.inputs = jg.at( "inputs" ).get<std::vector<net_id>>();
      if ( g.inputs.size() != arity( g.kind ) )
        throw format_error( "gate " + std::to_string( g.id ) + ": arity mismatch for " + kind_name );
      g.output = jg.at( "output" ).get<net_id>();
      g.init = detail::read_bit( jg.at( "init" ), "init" );
      for ( auto in : g.inputs )
        check( in, "gate " + std::to_string( g.id ) );
      check( g.output, "gate " + std::to_string( g.id ) );
      gates.push_back( std::move( g ) );
    }

    std::vector<dual_rail_port> ports;
    for ( auto const& jp : doc.at( "ports" ) )
    {
      dual_rail_port p;
      p.name = jp.at( "name" ).get<std::string>();
      auto const dir = jp.at( "dir" ).get<std::string>();
      if ( dir == "input" )
        p.direction = port_direction::input;
      else if ( dir == "output" )
        p.direction = port_direction::output;
      else
        throw format_error( "port " + p.name + ": unknown direction \"" + dir + "\"" );
      p.rail1 = jp.at( "rail1" ).get<net_id>();
      p.rail0 = jp.at( "rail0" ).get<net_id>();
      if ( jp.contains( "const_value" ) && !jp.at( "const_value" ).is_null() )
        p.const_value = detail::read_bit( jp.at( "const_value" ), "const_value" );
      check( p.rail1, "port " + p.name );
      check( p.rail0, "port " + p.name );
      ports.push_back( std::move( p ) );
    }

    std::map<std::string, std::string> metadata;
    if ( doc.contains( "metadata" ) )
      metadata = doc.at( "metadata" ).get<std::map<std::string, std::string>>();

    return netlist( doc.value( "name", std::string{} ), net_count, std::move( gates ), std::move( ports ), std::move( metadata ) );
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw format_error( std::string( "malformed netlist document: " ) + e.what() );
  }
}

inline netlist deserialize( std::string_view text )
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw format_error( std::string( "malformed netlist document: " ) + e.what() );
  }
  return from_json( doc );
}

/// Graphviz rendering: gates are `g<id>`, ports are `p<index>`; one edge per net consumer.
inline std::string to_dot( netlist const& n )
{
  std::ostringstream os;
  os << "digraph \"" << n.name() << "\" {\n";
  os << "  rankdir=LR;\n";

  std::vector<std::string> source( n.net_count() );
  for ( std::size_t i = 0; i < n.ports().size(); ++i )
  {
    auto const& p = n.ports()[i];
    os << "  p" << i << " [shape=" << ( p.is_input() ? "invhouse" : "house" ) << ", label=\"" << p.name;
    if ( p.const_value )
      os << "=" << ( *p.const_value ? 1 : 0 );
    os << "\"];\n";
    if ( p.is_input() )
    {
      if ( p.rail1 < source.size() )
        source[p.rail1] = "p" + std::to_string( i );
      if ( p.rail0 < source.size() )
        source[p.rail0] = "p" + std::to_string( i );
    }
  }
  for ( auto const& g : n.gates() )
  {
    os << "  g" << g.id << " [shape=" << ( g.kind == gate_kind::c2 ? "circle" : "box" ) << ", label=\""
       << ( g.kind == gate_kind::c2 ? std::string( "C" ) : std::string( to_string( g.kind ) ) ) << "\"];\n";
    if ( g.output < source.size() )
      source[g.output] = "g" + std::to_string( g.id );
  }

  auto edge = [&]( net_id net, std::string const& target ) {
    if ( net >= source.size() || source[net].empty() )
      return;
    os << "  " << source[net] << " -> " << target << " [label=\"n" << net << "\"];\n";
  };
  for ( auto const& g : n.gates() )
  {
    for ( auto in : g.inputs )
      edge( in, "g" + std::to_string( g.id ) );
  }
  for ( std::size_t i = 0; i < n.ports().size(); ++i )
  {
    auto const& p = n.ports()[i];
    if ( p.is_input() )
      continue;
    edge( p.rail1, "p" + std::to_string( i ) );
    edge( p.rail0, "p" + std::to_string( i ) );
  }
  os << "}\n";
  return os.str();
}

} // namespace qdi
