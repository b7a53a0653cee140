#pragma once

#include "encoding.hpp"
#include "netlist.hpp"
#include "protocol.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdi
{

/// The gate that merges mutually exclusive rails: OR2 under RTZ, AND2 under RTO.
constexpr gate_kind merge_kind( protocol p )
{
  return p == protocol::rtz ? gate_kind::or2 : gate_kind::and2;
}

constexpr net_id rail( dual_rail r, bool bit )
{
  return bit ? r.rail1 : r.rail0;
}

/// Strongly indicating AND: Z1 = C(X1,Y1), Z0 = merge of the three C-elements
/// producing a logical 0. Nothing on Z moves until both X and Y have arrived.
inline dual_rail build_strong_and2( netlist_builder& b, protocol p, dual_rail x, dual_rail y )
{
  bool const s = spacer_level( p );
  auto const z1 = b.add_gate( gate_kind::c2, { x.rail1, y.rail1 }, s );
  auto const c01 = b.add_gate( gate_kind::c2, { x.rail0, y.rail1 }, s );
  auto const c10 = b.add_gate( gate_kind::c2, { x.rail1, y.rail0 }, s );
  auto const c00 = b.add_gate( gate_kind::c2, { x.rail0, y.rail0 }, s );
  std::array const zero_terms{ c01, c10, c00 };
  auto const z0 = b.reduce_tree( merge_kind( p ), zero_terms, s );
  return { z1, z0 };
}

struct adder_outputs
{
  dual_rail sum;
  dual_rail carry;
};

enum class fa_variant : unsigned char
{
  dims,
  weak
};

constexpr std::string_view to_string( fa_variant v )
{
  return v == fa_variant::dims ? "dims_fa" : "weak_fa";
}

inline std::optional<fa_variant> parse_fa_variant( std::string_view name )
{
  if ( name == "dims_fa" )
    return fa_variant::dims;
  if ( name == "weak_fa" )
    return fa_variant::weak;
  return std::nullopt;
}

namespace detail
{

struct minterm_layer
{
  // pair[a][b] = C(A_a, B_b); minterm[4a + 2b + c] = C(pair[a][b], Cin_c)
  std::array<std::array<net_id, 2>, 2> pair{};
  std::array<net_id, 8> minterm{};
};

inline minterm_layer build_minterms( netlist_builder& b, protocol p, dual_rail a, dual_rail bb, dual_rail cin )
{
  bool const s = spacer_level( p );
  minterm_layer l;
  for ( int va = 1; va >= 0; --va )
  {
    for ( int vb = 1; vb >= 0; --vb )
      l.pair[va][vb] = b.add_gate( gate_kind::c2, { rail( a, va ), rail( bb, vb ) }, s );
  }
  for ( unsigned v = 0; v < 8; ++v )
  {
    bool const va = v & 4u, vb = v & 2u, vc = v & 1u;
    l.minterm[v] = b.add_gate( gate_kind::c2, { l.pair[va][vb], rail( cin, vc ) }, s );
  }
  return l;
}

inline net_id merge_minterms( netlist_builder& b, protocol p, minterm_layer const& l, bool ( *select )( unsigned ) )
{
  std::vector<net_id> terms;
  for ( unsigned v = 0; v < 8; ++v )
  {
    if ( select( v ) )
      terms.push_back( l.minterm[v] );
  }
  return b.reduce_tree( merge_kind( p ), terms, spacer_level( p ) );
}

constexpr bool odd_parity( unsigned v ) { return ( ( v >> 2 ) ^ ( v >> 1 ) ^ v ) & 1u; }
constexpr bool majority( unsigned v ) { return ( ( v >> 2 ) & 1u ) + ( ( v >> 1 ) & 1u ) + ( v & 1u ) >= 2; }

inline dual_rail build_sum( netlist_builder& b, protocol p, minterm_layer const& l )
{
  auto const s1 = merge_minterms( b, p, l, []( unsigned v ) { return odd_parity( v ); } );
  auto const s0 = merge_minterms( b, p, l, []( unsigned v ) { return !odd_parity( v ); } );
  return { s1, s0 };
}

} // namespace detail

/// Delay-insensitive minterm synthesis: one C-element per input minterm, every
/// output rail a merge of its minterms. Strongly indicating.
inline adder_outputs build_dims_fa( netlist_builder& b, protocol p, dual_rail a, dual_rail bb, dual_rail cin )
{
  auto const l = detail::build_minterms( b, p, a, bb, cin );
  auto const sum = detail::build_sum( b, p, l );
  auto const c1 = detail::merge_minterms( b, p, l, []( unsigned v ) { return detail::majority( v ); } );
  auto const c0 = detail::merge_minterms( b, p, l, []( unsigned v ) { return !detail::majority( v ); } );
  return { sum, { c1, c0 } };
}

/// Generate/propagate/kill adder. The carry resolves from A and B alone when they
/// agree; the sum always waits for all three inputs, so the block is weakly indicating.
inline adder_outputs build_weak_fa( netlist_builder& b, protocol p, dual_rail a, dual_rail bb, dual_rail cin )
{
  bool const s = spacer_level( p );
  auto const l = detail::build_minterms( b, p, a, bb, cin );
  auto const& generate = l.pair[1][1];
  auto const& kill = l.pair[0][0];
  std::array const halves{ l.pair[1][0], l.pair[0][1] };
  auto const propagate = b.reduce_tree( merge_kind( p ), halves, s );
  auto const carried1 = b.add_gate( gate_kind::c2, { propagate, cin.rail1 }, s );
  auto const carried0 = b.add_gate( gate_kind::c2, { propagate, cin.rail0 }, s );
  std::array const one_terms{ generate, carried1 };
  std::array const zero_terms{ kill, carried0 };
  auto const c1 = b.reduce_tree( merge_kind( p ), one_terms, s );
  auto const c0 = b.reduce_tree( merge_kind( p ), zero_terms, s );
  auto const sum = detail::build_sum( b, p, l );
  return { sum, { c1, c0 } };
}

inline adder_outputs build_full_adder( netlist_builder& b, fa_variant v, protocol p, dual_rail a, dual_rail bb, dual_rail cin )
{
  return v == fa_variant::dims ? build_dims_fa( b, p, a, bb, cin ) : build_weak_fa( b, p, a, bb, cin );
}

inline netlist strong_and2( protocol p )
{
  netlist_builder b( "strong_and2" );
  auto const x = b.add_input( "X" );
  auto const y = b.add_input( "Y" );
  b.add_output( "Z", build_strong_and2( b, p, x, y ) );
  b.set_label( "component", "strong_and2" );
  b.set_label( "protocol", std::string( to_string( p ) ) );
  return std::move( b ).build();
}

inline netlist full_adder( fa_variant v, protocol p )
{
  netlist_builder b( std::string( to_string( v ) ) );
  auto const a = b.add_input( "A" );
  auto const bb = b.add_input( "B" );
  auto const cin = b.add_input( "Cin" );
  auto const out = build_full_adder( b, v, p, a, bb, cin );
  b.add_output( "Sum", out.sum );
  b.add_output( "Cout", out.carry );
  b.set_label( "component", std::string( to_string( v ) ) );
  b.set_label( "protocol", std::string( to_string( p ) ) );
  return std::move( b ).build();
}

inline netlist dims_full_adder( protocol p ) { return full_adder( fa_variant::dims, p ); }
inline netlist weak_full_adder( protocol p ) { return full_adder( fa_variant::weak, p ); }

/// `bits`-wide ripple-carry adder. Inputs A0.., B0.., Cin; outputs S0.., Cout.
inline netlist ripple_carry_adder( unsigned bits, fa_variant v, protocol p )
{
  if ( bits < 1 )
    throw netlist_error( "ripple_carry_adder needs at least one bit" );
  netlist_builder b( "rca" + std::to_string( bits ) );
  std::vector<dual_rail> a, bb;
  for ( unsigned i = 0; i < bits; ++i )
    a.push_back( b.add_input( "A" + std::to_string( i ) ) );
  for ( unsigned i = 0; i < bits; ++i )
    bb.push_back( b.add_input( "B" + std::to_string( i ) ) );
  auto carry = b.add_input( "Cin" );
  for ( unsigned i = 0; i < bits; ++i )
  {
    auto const out = build_full_adder( b, v, p, a[i], bb[i], carry );
    b.add_output( "S" + std::to_string( i ), out.sum );
    carry = out.carry;
  }
  b.add_output( "Cout", carry );
  b.set_label( "component", "rca" + std::to_string( bits ) );
  b.set_label( "fa_variant", std::string( to_string( v ) ) );
  b.set_label( "protocol", std::string( to_string( p ) ) );
  return std::move( b ).build();
}

inline constexpr std::array<std::string_view, 4> component_names{ "strong_and2", "dims_fa", "weak_fa", "rca2" };

/// Builds a component by its CLI name; "rca2" is two cascaded DIMS adders.
inline std::optional<netlist> make_component( std::string_view name, protocol p )
{
  if ( name == "strong_and2" )
    return strong_and2( p );
  if ( auto v = parse_fa_variant( name ) )
    return full_adder( *v, p );
  if ( name == "rca2" )
    return ripple_carry_adder( 2, fa_variant::dims, p );
  return std::nullopt;
}

/// Truth-table oracle for a named component, or nothing for unknown names.
inline std::optional<oracle_fn> component_oracle( std::string_view name )
{
  if ( name == "strong_and2" )
    return oracle_fn( []( std::vector<bool> const& in ) { return std::vector<bool>{ in.at( 0 ) && in.at( 1 ) }; } );
  if ( name == "dims_fa" || name == "weak_fa" )
  {
    return oracle_fn( []( std::vector<bool> const& in ) {
      auto const total = int( in.at( 0 ) ) + int( in.at( 1 ) ) + int( in.at( 2 ) );
      return std::vector<bool>{ ( total & 1 ) != 0, total >= 2 };
    } );
  }
  if ( name.starts_with( "rca" ) )
  {
    return oracle_fn( []( std::vector<bool> const& in ) {
      auto const bits = ( in.size() - 1 ) / 2;
      std::uint64_t a = 0, b = 0;
      for ( std::size_t i = 0; i < bits; ++i )
      {
        a |= std::uint64_t( in[i] ) << i;
        b |= std::uint64_t( in[bits + i] ) << i;
      }
      return unpack_bits( a + b + ( in.back() ? 1 : 0 ), bits + 1 );
    } );
  }
  return std::nullopt;
}

/// A rail literal: `variable` at its `rail` (the rail that carries logical `rail`).
struct literal
{
  std::string variable;
  bool rail{};

  friend auto operator<=>( literal const&, literal const& ) = default;
};

using cube = std::vector<literal>;
using cube_list = std::vector<cube>;

/// True iff every pair of cubes holds complementary rails of some variable, so at
/// most one cube can be active under one-hot dual-rail data.
inline bool disjoint_sop_check( cube_list const& cubes )
{
  for ( std::size_t i = 0; i < cubes.size(); ++i )
  {
    for ( std::size_t j = i + 1; j < cubes.size(); ++j )
    {
      bool conflict = false;
      for ( auto const& x : cubes[i] )
      {
        for ( auto const& y : cubes[j] )
        {
          if ( x.variable == y.variable && x.rail != y.rail )
          {
            conflict = true;
            break;
          }
        }
        if ( conflict )
          break;
      }
      if ( !conflict )
        return false;
    }
  }
  return true;
}

/// Sum-of-products cover of a rail over input-port rail literals: C2 multiplies,
/// the protocol's merge gate adds.
inline cube_list output_cover( netlist const& n, protocol p, net_id net )
{
  std::vector<std::optional<literal>> port_literal( n.net_count() );
  for ( auto const& port : n.ports() )
  {
    if ( !port.is_input() )
      continue;
    port_literal[port.rail1] = literal{ port.name, true };
    port_literal[port.rail0] = literal{ port.name, false };
  }
  auto const driver = gate_drivers( n );
  auto const merge = merge_kind( p );

  auto cover = [&]( auto&& self, net_id id ) -> cube_list {
    if ( port_literal.at( id ) )
      return { cube{ *port_literal[id] } };
    auto const d = driver.at( id );
    if ( !d )
      throw netlist_error( "net n" + std::to_string( id ) + " has no driver" );
    auto const& g = n.gate_at( *d );
    if ( g.kind == merge )
    {
      auto lhs = self( self, g.inputs[0] );
      auto rhs = self( self, g.inputs[1] );
      lhs.insert( lhs.end(), rhs.begin(), rhs.end() );
      return lhs;
    }
    if ( g.kind == gate_kind::c2 )
    {
      cube_list out;
      for ( auto const& x : self( self, g.inputs[0] ) )
      {
        for ( auto const& y : self( self, g.inputs[1] ) )
        {
          cube c = x;
          c.insert( c.end(), y.begin(), y.end() );
          std::sort( c.begin(), c.end() );
          c.erase( std::unique( c.begin(), c.end() ), c.end() );
          out.push_back( std::move( c ) );
        }
      }
      return out;
    }
    throw netlist_error( "gate " + std::to_string( g.id ) + " is not part of a dual-rail cover" );
  };
  return cover( cover, net );
}

} // namespace qdi
