#pragma once

// Reference models that share no code with the event-driven simulator: plain
// arithmetic for the datapath functions and a timed evaluation of monotone DAGs
// for latencies.

#include <qdi/netlist.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle
{

inline std::uint64_t shift_add_product( std::uint64_t a, std::uint64_t b )
{
  std::uint64_t p = 0;
  for ( unsigned k = 0; b >> k; ++k )
    if ( ( b >> k ) & 1u )
      p += a << k;
  return p;
}

inline std::vector<bool> bits_of( std::uint64_t v, std::size_t width )
{
  std::vector<bool> out( width );
  for ( std::size_t i = 0; i < width; ++i )
    out[i] = ( v >> i ) & 1u;
  return out;
}

inline std::vector<bool> full_adder( bool a, bool b, bool c )
{
  return { static_cast<bool>( a ^ b ^ c ), static_cast<bool>( ( a && b ) || ( a && c ) || ( b && c ) ) };
}

inline bool gate_eval( qdi::gate_kind k, bool a, bool b, bool held )
{
  switch ( k )
  {
  case qdi::gate_kind::and2: return a && b;
  case qdi::gate_kind::or2: return a || b;
  case qdi::gate_kind::inv: return !a;
  case qdi::gate_kind::c2: return a == b ? a : held;
  }
  return held;
}

/// Gates in an order where every driver precedes its readers. Throws on cycles.
inline std::vector<qdi::gate_id> topological_gates( qdi::netlist const& n )
{
  std::vector<std::optional<qdi::gate_id>> driver( n.net_count() );
  for ( auto const& g : n.gates() )
    driver[g.output] = g.id;
  std::vector<qdi::gate_id> order;
  std::vector<int> mark( n.gates().size(), 0 );
  auto visit = [&]( auto&& self, qdi::gate_id id ) -> void {
    if ( mark[id] == 2 )
      return;
    if ( mark[id] == 1 )
      throw std::runtime_error( "oracle: netlist has a cycle" );
    mark[id] = 1;
    for ( auto in : n.gate_at( id ).inputs )
      if ( driver[in] )
        self( self, *driver[in] );
    mark[id] = 2;
    order.push_back( id );
  };
  for ( auto const& g : n.gates() )
    visit( visit, g.id );
  return order;
}

/// Quiescent values with every undriven net at `level`, C2 outputs seeded there too.
inline std::vector<bool> rest_values( qdi::netlist const& n, bool level )
{
  std::vector<bool> v( n.net_count(), level );
  for ( auto id : topological_gates( n ) )
  {
    auto const& g = n.gate_at( id );
    bool const a = v[g.inputs[0]];
    bool const b = g.inputs.size() > 1 ? v[g.inputs[1]] : false;
    v[g.output] = gate_eval( g.kind, a, b, level );
  }
  return v;
}

struct timed_phase
{
  std::vector<bool> after;
  std::vector<std::optional<std::uint64_t>> changed_at;
};

/// Applies `applied` at time 0 to a quiescent DAG and propagates with per-gate
/// delays, assuming every net switches at most once. Throws if a gate would switch
/// twice or be excited and then released.
inline timed_phase monotone_phase( qdi::netlist const& n, std::vector<bool> const& before, std::map<qdi::net_id, bool> const& applied,
                                   std::vector<std::uint32_t> const& delays )
{
  timed_phase r{ before, std::vector<std::optional<std::uint64_t>>( n.net_count() ) };
  for ( auto [net, v] : applied )
  {
    if ( before[net] != v )
    {
      r.after[net] = v;
      r.changed_at[net] = 0;
    }
  }
  auto at = [&]( qdi::net_id net, std::uint64_t t ) { return r.changed_at[net] && *r.changed_at[net] <= t ? r.after[net] : before[net]; };
  for ( auto id : topological_gates( n ) )
  {
    auto const& g = n.gate_at( id );
    std::set<std::uint64_t> times;
    for ( auto in : g.inputs )
      if ( r.changed_at[in] )
        times.insert( *r.changed_at[in] );
    bool const start = before[g.output];
    std::optional<std::uint64_t> excited;
    for ( auto t : times )
    {
      bool const a = at( g.inputs[0], t );
      bool const b = g.inputs.size() > 1 ? at( g.inputs[1], t ) : false;
      bool const next = gate_eval( g.kind, a, b, start );
      if ( next != start && !excited )
        excited = t;
      else if ( next == start && excited )
        throw std::runtime_error( "oracle: non-monotone excitation on gate " + std::to_string( id ) );
    }
    if ( excited )
    {
      r.after[g.output] = !start;
      r.changed_at[g.output] = *excited + delays.at( id );
    }
  }
  return r;
}

struct transaction
{
  std::vector<bool> outputs;
  std::uint64_t forward{};
  std::uint64_t reverse{};
  std::uint64_t transitions{};
};

/// Data then spacer through a datapath; latency is the last output-rail change.
/// `values` follows the order of non-constant input ports; constants carry their
/// fixed bit.
inline transaction run( qdi::netlist const& n, bool rtz, std::vector<bool> const& values, std::vector<std::uint32_t> const& delays )
{
  bool const level = !rtz;
  auto const rest = rest_values( n, level );
  std::map<qdi::net_id, bool> data, spacer;
  std::size_t k = 0;
  for ( auto const& p : n.ports() )
  {
    if ( !p.is_input() )
      continue;
    bool const bit = p.const_value ? *p.const_value : values.at( k++ );
    bool const r1 = rtz ? bit : !bit;
    data[p.rail1] = r1;
    data[p.rail0] = !r1;
    spacer[p.rail1] = level;
    spacer[p.rail0] = level;
  }
  auto const fwd = monotone_phase( n, rest, data, delays );
  auto const ret = monotone_phase( n, fwd.after, spacer, delays );
  transaction t;
  for ( auto const& p : n.ports() )
  {
    if ( p.is_input() )
      continue;
    bool const r1 = fwd.after[p.rail1];
    t.outputs.push_back( rtz ? r1 : !r1 );
    for ( auto rail : { p.rail1, p.rail0 } )
    {
      if ( fwd.changed_at[rail] )
        t.forward = std::max( t.forward, *fwd.changed_at[rail] );
      if ( ret.changed_at[rail] )
        t.reverse = std::max( t.reverse, *ret.changed_at[rail] );
    }
  }
  for ( qdi::net_id i = 0; i < n.net_count(); ++i )
    t.transitions += ( fwd.changed_at[i] ? 1 : 0 ) + ( ret.changed_at[i] ? 1 : 0 );
  return t;
}

inline std::vector<std::uint32_t> unit_delays( qdi::netlist const& n )
{
  return std::vector<std::uint32_t>( n.gates().size(), 1 );
}

/// Random valid netlist: a few input ports, a DAG of gates whose combinational inits
/// are consistent with an all-`level` reset, and some outputs.
inline qdi::netlist random_netlist( std::mt19937_64& rng, bool level )
{
  qdi::netlist_builder b( "random" );
  std::uniform_int_distribution<int> count( 1, 4 );
  std::vector<qdi::net_id> nets;
  std::vector<bool> value;
  for ( int i = 0, inputs = count( rng ); i < inputs; ++i )
  {
    auto r = b.add_input( "I" + std::to_string( i ) );
    nets.insert( nets.end(), { r.rail1, r.rail0 } );
    value.insert( value.end(), { level, level } );
  }
  std::uniform_int_distribution<int> gates( 1, 30 );
  for ( int i = 0, total = gates( rng ); i < total; ++i )
  {
    auto const kind = qdi::all_gate_kinds[std::uniform_int_distribution<std::size_t>( 0, 3 )( rng )];
    std::uniform_int_distribution<std::size_t> pick( 0, nets.size() - 1 );
    std::vector<qdi::net_id> ins;
    for ( std::size_t k = 0; k < qdi::arity( kind ); ++k )
      ins.push_back( nets[pick( rng )] );
    bool const a = value[ins[0]];
    bool const bb = ins.size() > 1 ? value[ins[1]] : false;
    bool const init = gate_eval( kind, a, bb, level );
    if ( kind == qdi::gate_kind::c2 && init != level )
      continue; // C-elements reset to the spacer level
    nets.push_back( b.add_gate( kind, ins, init ) );
    value.push_back( init );
  }
  for ( int i = 0, outs = count( rng ); i < outs && nets.size() >= 2; ++i )
  {
    std::uniform_int_distribution<std::size_t> pick( 0, nets.size() - 2 );
    auto const k = pick( rng );
    b.add_output( "O" + std::to_string( i ), { nets[k], nets[k + 1] } );
  }
  b.set_label( "seed_note", "generated" );
  return std::move( b ).build();
}

/// The same netlist with OR2 and AND2 exchanged and every init complemented.
inline qdi::netlist swap_protocol( qdi::netlist const& n )
{
  std::vector<qdi::gate> gates( n.gates().begin(), n.gates().end() );
  for ( auto& g : gates )
  {
    if ( g.kind == qdi::gate_kind::or2 )
      g.kind = qdi::gate_kind::and2;
    else if ( g.kind == qdi::gate_kind::and2 )
      g.kind = qdi::gate_kind::or2;
    g.init = !g.init;
  }
  auto meta = n.metadata();
  if ( meta.count( "protocol" ) )
    meta["protocol"] = meta["protocol"] == "rtz" ? "rto" : "rtz";
  auto name = n.name();
  if ( auto pos = name.rfind( "_rtz" ); pos != std::string::npos )
    name.replace( pos, 4, "_rto" );
  return qdi::netlist( name, n.net_count(), std::move( gates ), { n.ports().begin(), n.ports().end() }, meta );
}

} // namespace oracle
