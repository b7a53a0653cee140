#pragma once

#include "encoding.hpp"
#include "netlist.hpp"
#include "simulator.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qdi
{

class transaction_error : public simulation_error
{
public:
  using simulation_error::simulation_error;
};

struct completion_detector
{
  net_id ackout{};
  net_id ackin{};
};

/// Per-pair OR2 (RTZ) or AND2 (RTO), joined by a C2 tree into ACKOUT; ACKIN = INV(ACKOUT).
/// ACKOUT rests at the spacer level, so it reads 1 on all-data under RTZ and on
/// all-spacer under RTO.
inline completion_detector build_completion_detector( netlist_builder& b, std::span<const dual_rail> ports, protocol p )
{
  if ( ports.empty() )
    throw netlist_error( "completion detector needs at least one port" );
  bool const level = spacer_level( p );
  auto const merge = p == protocol::rtz ? gate_kind::or2 : gate_kind::and2;
  std::vector<net_id> done;
  done.reserve( ports.size() );
  for ( auto const& r : ports )
    done.push_back( b.add_gate( merge, { r.rail1, r.rail0 }, level ) );
  auto const ackout = b.reduce_tree( gate_kind::c2, done, level );
  auto const ackin = b.add_gate( gate_kind::inv, { ackout }, !level );
  return { ackout, ackin };
}

struct transaction_metrics
{
  sim_time forward_latency{};
  sim_time reverse_latency{};
  sim_time cycle_time{};
  std::uint64_t transitions{};

  friend bool operator==( transaction_metrics const&, transaction_metrics const& ) = default;
};

/// A datapath wrapped with the receiving completion detector. Gates and nets of the
/// datapath keep their ids; the detector is appended after them.
struct handshake_env
{
  std::shared_ptr<const compiled_circuit> circuit;
  protocol proto{ protocol::rtz };
  std::size_t datapath_gates{};
  std::size_t datapath_nets{};
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> constants;
  std::vector<std::size_t> outputs;
  completion_detector cd;

  netlist const& net() const { return circuit->circuit; }
  dual_rail_port const& port( std::size_t index ) const { return net().ports()[index]; }
  bool in_datapath( net_id n ) const { return n < datapath_nets; }
};

inline handshake_env make_environment( netlist const& datapath, protocol p )
{
  auto const outputs = datapath.output_ports();
  if ( outputs.empty() )
    throw netlist_error( "datapath has no output ports" );

  netlist_builder b( datapath.name() );
  b.append( datapath );
  for ( auto const& port : datapath.ports() )
    b.add_port( port );
  for ( auto const& [k, v] : datapath.metadata() )
    b.set_label( k, v );
  std::vector<dual_rail> rails;
  for ( auto i : outputs )
    rails.push_back( datapath.ports()[i].rails() );
  auto const cd = build_completion_detector( b, rails, p );

  handshake_env env;
  env.proto = p;
  env.datapath_gates = datapath.gates().size();
  env.datapath_nets = datapath.net_count();
  env.cd = cd;
  env.circuit = compile( std::move( b ).build() );
  env.inputs = env.net().input_ports();
  env.constants = env.net().constant_ports();
  env.outputs = env.net().output_ports();
  return env;
}

inline sim_state initialize( handshake_env const& env, delay_model const& delays = unit_delay{} )
{
  return initialize( env.circuit, env.proto, delays );
}

inline codeword_state decode_port( sim_state const& s, protocol p, dual_rail_port const& port )
{
  return decode( p, s.value( port.rail1 ), s.value( port.rail0 ) );
}

inline std::vector<codeword_state> decode_outputs( sim_state const& s, handshake_env const& env )
{
  std::vector<codeword_state> out;
  out.reserve( env.outputs.size() );
  for ( auto i : env.outputs )
    out.push_back( decode_port( s, env.proto, env.port( i ) ) );
  return out;
}

/// Rail assignments for one phase: data for `values` (plus the tied constants), or
/// the spacer for every input when `values` is null.
inline std::vector<assignment> phase_assignments( handshake_env const& env, std::vector<bool> const* values )
{
  std::vector<assignment> out;
  auto push = [&]( dual_rail_port const& port, rail_values v ) {
    out.push_back( { port.rail1, v.rail1 } );
    out.push_back( { port.rail0, v.rail0 } );
  };
  if ( values && values->size() != env.inputs.size() )
    throw contract_error( "expected " + std::to_string( env.inputs.size() ) + " input bits, got " + std::to_string( values->size() ) );
  for ( std::size_t k = 0; k < env.inputs.size(); ++k )
  {
    auto const& port = env.port( env.inputs[k] );
    push( port, values ? encode( env.proto, ( *values )[k] ) : spacer_rails( env.proto ) );
  }
  for ( auto i : env.constants )
  {
    auto const& port = env.port( i );
    push( port, values ? encode( env.proto, *port.const_value ) : spacer_rails( env.proto ) );
  }
  return out;
}

/// What happened during one half of a handshake.
struct phase_report
{
  bool data_phase{};
  sim_time elapsed{};                  // application to quiescence
  std::optional<sim_time> completion;  // application to all outputs complete
  std::vector<codeword_state> outputs; // decoded at quiescence
  std::uint64_t datapath_transitions{};
  std::vector<hazard_record> datapath_hazards;
  std::vector<hazard_record> environment_hazards;
  std::vector<net_id> pending_at_completion; // datapath nets still excited when outputs completed
  std::vector<net_id> repeated_transitions;  // datapath nets that switched more than once
  bool ack_reached{};
};

/// Drives one phase and settles it, recording completion and orphan evidence.
inline phase_report run_phase( sim_state& s, handshake_env const& env, std::vector<bool> const* values,
                               std::uint64_t limit = sim_state::default_limit )
{
  phase_report r;
  r.data_phase = values != nullptr;
  auto const nets = env.datapath_nets;
  std::vector<std::uint64_t> before( nets );
  for ( net_id n = 0; n < nets; ++n )
    before[n] = s.transitions( n );
  auto const hazards_before = s.hazards().size();

  auto complete = [&] {
    for ( auto i : env.outputs )
    {
      auto const c = decode_port( s, env.proto, env.port( i ) );
      if ( r.data_phase ? !c.is_data() : !c.is_spacer() )
        return false;
    }
    return true;
  };
  auto const start = s.now();
  auto const transitions_before = s.transitions();
  auto check_completion = [&] {
    if ( r.completion || !complete() )
      return;
    r.completion = s.now() - start;
    for ( auto n : s.pending_nets() )
    {
      if ( env.in_datapath( n ) )
        r.pending_at_completion.push_back( n );
    }
  };

  auto const assignments = phase_assignments( env, values );
  s.apply( assignments );
  check_completion();
  sim_time last = start;
  while ( auto t = s.step() )
  {
    last = *t;
    check_completion();
    if ( s.transitions() - transitions_before > limit )
      throw simulation_error( "circuit did not quiesce within " + std::to_string( limit ) + " events" );
  }
  r.elapsed = last - start;
  r.outputs = decode_outputs( s, env );

  for ( net_id n = 0; n < nets; ++n )
  {
    auto const delta = s.transitions( n ) - before[n];
    r.datapath_transitions += delta;
    if ( delta > 1 )
      r.repeated_transitions.push_back( n );
  }
  auto const& hz = s.hazards();
  for ( auto i = hazards_before; i < hz.size(); ++i )
  {
    if ( hz[i].gate < env.datapath_gates )
      r.datapath_hazards.push_back( hz[i] );
    else
      r.environment_hazards.push_back( hz[i] );
  }
  // ACKIN is the complement of ACKOUT; after data it must sit opposite the spacer level.
  bool const level = spacer_level( env.proto );
  bool const expected_ackout = r.data_phase ? !level : level;
  r.ack_reached = s.value( env.cd.ackout ) == expected_ackout && s.value( env.cd.ackin ) == !expected_ackout;
  return r;
}

struct transaction_result
{
  std::vector<bool> outputs;
  transaction_metrics metrics;
};

namespace detail
{

inline void require_phase_ok( phase_report const& r, handshake_env const& env )
{
  char const* phase = r.data_phase ? "data" : "return";
  for ( std::size_t k = 0; k < r.outputs.size(); ++k )
  {
    if ( r.outputs[k].is_illegal() )
      throw transaction_error( std::string( phase ) + " phase: output " + env.port( env.outputs[k] ).name + " decodes Illegal" );
  }
  if ( !r.datapath_hazards.empty() )
    throw transaction_error( std::string( phase ) + " phase: hazard in datapath: " + r.datapath_hazards.front().description );
  if ( !r.completion )
    throw transaction_error( std::string( phase ) + " phase: outputs never completed" );
  for ( std::size_t k = 0; k < r.outputs.size(); ++k )
  {
    if ( r.data_phase ? !r.outputs[k].is_data() : !r.outputs[k].is_spacer() )
      throw transaction_error( std::string( phase ) + " phase: output " + env.port( env.outputs[k] ).name + " left the completed state" );
  }
  if ( !r.ack_reached )
    throw transaction_error( std::string( phase ) + " phase: acknowledgment did not toggle" );
}

} // namespace detail

/// One data phase followed by the return-to-spacer phase, closed-loop on ACKIN.
/// Latencies are measured at the output ports; the detector's own delay is excluded.
inline transaction_result run_transaction( sim_state& s, handshake_env const& env, std::vector<bool> const& values,
                                           std::uint64_t limit = sim_state::default_limit )
{
  if ( !s.quiescent() )
    throw transaction_error( "transaction started on a non-quiescent state" );
  bool const level = spacer_level( env.proto );
  if ( s.value( env.cd.ackin ) != !level )
    throw transaction_error( "environment is not ready for data" );

  auto const data = run_phase( s, env, &values, limit );
  detail::require_phase_ok( data, env );
  auto const ret = run_phase( s, env, nullptr, limit );
  detail::require_phase_ok( ret, env );

  transaction_result out;
  for ( auto const& c : data.outputs )
    out.outputs.push_back( c.value );
  out.metrics.forward_latency = *data.completion;
  out.metrics.reverse_latency = *ret.completion;
  out.metrics.cycle_time = out.metrics.forward_latency + out.metrics.reverse_latency;
  out.metrics.transitions = data.datapath_transitions + ret.datapath_transitions;
  return out;
}

inline std::vector<transaction_result> run_sequence( sim_state& s, handshake_env const& env,
                                                     std::span<const std::vector<bool>> vectors,
                                                     std::uint64_t limit = sim_state::default_limit )
{
  std::vector<transaction_result> out;
  out.reserve( vectors.size() );
  for ( auto const& v : vectors )
    out.push_back( run_transaction( s, env, v, limit ) );
  return out;
}

/// Input bits in environment order from a port-name map; every input must be named.
inline std::vector<bool> input_values( handshake_env const& env, std::map<std::string, bool> const& named )
{
  std::vector<bool> out;
  for ( auto i : env.inputs )
  {
    auto const& name = env.port( i ).name;
    auto it = named.find( name );
    if ( it == named.end() )
      throw contract_error( "no value for input port " + name );
    out.push_back( it->second );
  }
  for ( auto const& [name, v] : named )
  {
    auto idx = env.net().find_port( name );
    if ( !idx || !env.port( *idx ).is_input() || env.port( *idx ).is_constant() )
      throw contract_error( "unknown input port " + name );
  }
  return out;
}

/// Expected output bits (in output-port order) for input bits (in input-port order).
using oracle_fn = std::function<std::vector<bool>( std::vector<bool> const& )>;

/// Packs bits into an integer, bit k from element k.
inline std::uint64_t pack_bits( std::vector<bool> const& bits )
{
  std::uint64_t v = 0;
  for ( std::size_t k = 0; k < bits.size(); ++k )
    v |= static_cast<std::uint64_t>( bits[k] ) << k;
  return v;
}

inline std::vector<bool> unpack_bits( std::uint64_t value, std::size_t width )
{
  std::vector<bool> out( width );
  for ( std::size_t k = 0; k < width; ++k )
    out[k] = ( ( value >> k ) & 1u ) != 0;
  return out;
}

} // namespace qdi
