#pragma once

#include "encoding.hpp"
#include "netlist.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qdi
{

using sim_time = std::uint64_t;

class simulation_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class initialization_error : public simulation_error
{
public:
  using simulation_error::simulation_error;
};

class contract_error : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

struct unit_delay
{
};

struct per_kind_delay
{
  std::map<gate_kind, std::uint32_t> delays; // kinds not listed use 1
};

struct per_gate_delay
{
  std::map<gate_id, std::uint32_t> delays; // gates not listed use 1
};

/// Each gate draws its delay once, in gate-id order, from a generator seeded with `seed`.
struct random_uniform_delay
{
  std::uint32_t min{ 1 };
  std::uint32_t max{ 16 };
  std::uint64_t seed{};
};

using delay_model = std::variant<unit_delay, per_kind_delay, per_gate_delay, random_uniform_delay>;

inline std::vector<std::uint32_t> resolve_delays( delay_model const& model, netlist const& n )
{
  std::vector<std::uint32_t> out( n.gates().size(), 1u );
  auto lookup = []( auto const& map, auto key ) {
    auto it = map.find( key );
    return it == map.end() ? 1u : it->second;
  };
  if ( auto const* pk = std::get_if<per_kind_delay>( &model ) )
  {
    for ( auto const& g : n.gates() )
      out[g.id] = lookup( pk->delays, g.kind );
  }
  else if ( auto const* pg = std::get_if<per_gate_delay>( &model ) )
  {
    for ( auto const& g : n.gates() )
      out[g.id] = lookup( pg->delays, g.id );
  }
  else if ( auto const* ru = std::get_if<random_uniform_delay>( &model ) )
  {
    if ( ru->min > ru->max )
      throw contract_error( "random delay range is empty" );
    std::mt19937_64 rng( ru->seed );
    std::uniform_int_distribution<std::uint32_t> dist( ru->min, ru->max );
    for ( auto& d : out )
      d = dist( rng );
  }
  for ( auto d : out )
  {
    if ( d < 1 )
      throw contract_error( "gate delays must be at least one time unit" );
  }
  return out;
}

struct hazard_record
{
  sim_time time{};
  gate_id gate{};
  std::string description;
};

struct trace_entry
{
  sim_time time{};
  net_id net{};
  bool value{};
};

struct assignment
{
  net_id net{};
  bool value{};
};

struct settle_report
{
  sim_time elapsed{};
  std::uint64_t transitions{};
  std::vector<hazard_record> hazards;
};

/// Netlist plus the lookup tables the simulator needs; shared read-only between states.
struct compiled_circuit
{
  netlist circuit;
  std::vector<std::optional<gate_id>> driver;
  std::vector<std::vector<gate_id>> fanout;

  explicit compiled_circuit( netlist n )
      : circuit( std::move( n ) ), driver( gate_drivers( circuit ) ), fanout( gate_fanouts( circuit ) )
  {
  }
};

inline std::shared_ptr<const compiled_circuit> compile( netlist n )
{
  return std::make_shared<const compiled_circuit>( std::move( n ) );
}

/// Discrete-event state of one circuit. Inertial gate semantics: a pending output
/// event whose excitation disappears is cancelled and logged as a hazard.
class sim_state
{
public:
  static constexpr sim_time no_event = std::numeric_limits<sim_time>::max();

  sim_state( std::shared_ptr<const compiled_circuit> circuit, std::vector<std::uint32_t> delays )
      : circuit_( std::move( circuit ) ), delays_( std::move( delays ) ), values_( circuit_->circuit.net_count(), 0 ),
        pending_time_( circuit_->circuit.net_count(), no_event ), pending_value_( circuit_->circuit.net_count(), 0 ),
        net_transitions_( circuit_->circuit.net_count(), 0 )
  {
  }

  netlist const& circuit() const { return circuit_->circuit; }
  std::shared_ptr<const compiled_circuit> const& compiled() const { return circuit_; }

  bool value( net_id n ) const { return values_.at( n ) != 0; }
  sim_time now() const { return now_; }
  bool quiescent() const { return queue_.empty(); }
  bool pending( net_id n ) const { return pending_time_.at( n ) != no_event; }
  std::size_t pending_count() const { return queue_.size(); }
  std::uint32_t delay( gate_id g ) const { return delays_.at( g ); }

  std::uint64_t transitions() const { return transitions_; }
  std::uint64_t transitions( net_id n ) const { return net_transitions_.at( n ); }
  std::vector<hazard_record> const& hazards() const { return hazards_; }

  void enable_trace( bool on = true ) { tracing_ = on; }
  std::vector<trace_entry> const& trace() const { return trace_; }

  /// Nets with a pending event, ascending.
  std::vector<net_id> pending_nets() const
  {
    std::vector<net_id> out;
    for ( auto const& [t, n] : queue_ )
      out.push_back( n );
    std::sort( out.begin(), out.end() );
    return out;
  }

  /// Output the gate would settle to from the present values.
  bool target( gate const& g ) const
  {
    bool const a = values_[g.inputs[0]] != 0;
    bool const b = g.inputs.size() > 1 ? values_[g.inputs[1]] != 0 : false;
    return evaluate( g.kind, a, b, values_[g.output] != 0 );
  }

  bool gate_stable( gate const& g ) const { return target( g ) == value( g.output ); }

  /// Drives environment nets at the current time.
  void apply( std::span<const assignment> assignments )
  {
    auto const& c = *circuit_;
    for ( auto const& a : assignments )
    {
      if ( a.net >= values_.size() )
        throw contract_error( "assignment to unknown net n" + std::to_string( a.net ) );
      if ( c.driver[a.net] )
        throw contract_error( "assignment to gate-driven net n" + std::to_string( a.net ) );
    }
    touched_.clear();
    for ( auto const& a : assignments )
    {
      if ( ( values_[a.net] != 0 ) != a.value )
        commit( a.net, a.value );
    }
    evaluate_touched();
  }

  /// Processes every event at the earliest pending time. Returns that time, or
  /// nothing when the state is quiescent.
  std::optional<sim_time> step()
  {
    if ( queue_.empty() )
      return std::nullopt;
    auto const t = queue_.begin()->first;
    now_ = t;
    touched_.clear();
    while ( !queue_.empty() && queue_.begin()->first == t )
    {
      auto const n = queue_.begin()->second;
      queue_.erase( queue_.begin() );
      pending_time_[n] = no_event;
      commit( n, pending_value_[n] != 0 );
    }
    evaluate_touched();
    return t;
  }

  settle_report apply_and_settle( std::span<const assignment> assignments, std::uint64_t limit = default_limit )
  {
    auto const start = now_;
    auto const transitions_before = transitions_;
    auto const hazards_before = hazards_.size();
    apply( assignments );
    sim_time last = start;
    while ( auto t = step() )
    {
      last = *t;
      if ( transitions_ - transitions_before > limit )
        throw simulation_error( "circuit did not quiesce within " + std::to_string( limit ) + " events" );
    }
    settle_report r;
    r.elapsed = last - start;
    r.transitions = transitions_ - transitions_before;
    r.hazards.assign( hazards_.begin() + static_cast<std::ptrdiff_t>( hazards_before ), hazards_.end() );
    return r;
  }

  static constexpr std::uint64_t default_limit = 1'000'000;

  /// Initial relaxation used by `initialize`; not meant for use mid-simulation.
  void reset_values( std::vector<std::uint8_t> values ) { values_ = std::move( values ); }

private:
  void commit( net_id n, bool v )
  {
    values_[n] = v ? 1 : 0;
    ++transitions_;
    ++net_transitions_[n];
    if ( tracing_ )
      trace_.push_back( { now_, n, v } );
    auto const& readers = circuit_->fanout[n];
    touched_.insert( touched_.end(), readers.begin(), readers.end() );
  }

  void evaluate_touched()
  {
    std::sort( touched_.begin(), touched_.end() );
    touched_.erase( std::unique( touched_.begin(), touched_.end() ), touched_.end() );
    auto const gates = circuit_->circuit.gates();
    for ( auto id : touched_ )
      excite( gates[id] );
    touched_.clear();
  }

  void excite( gate const& g )
  {
    auto const out = g.output;
    bool const next = target( g );
    if ( pending_time_[out] != no_event )
    {
      if ( ( pending_value_[out] != 0 ) == next )
        return;
      hazards_.push_back( { now_, g.id,
                            "disabled excitation: " + std::string( to_string( g.kind ) ) + " gate " + std::to_string( g.id ) +
                                " output n" + std::to_string( out ) + " lost its pending " +
                                std::to_string( pending_value_[out] ) + " scheduled for t=" + std::to_string( pending_time_[out] ) } );
      queue_.erase( { pending_time_[out], out } );
      pending_time_[out] = no_event;
    }
    if ( next != ( values_[out] != 0 ) )
    {
      auto const at = now_ + delays_[g.id];
      pending_time_[out] = at;
      pending_value_[out] = next ? 1 : 0;
      queue_.insert( { at, out } );
    }
  }

  std::shared_ptr<const compiled_circuit> circuit_;
  std::vector<std::uint32_t> delays_;
  std::vector<std::uint8_t> values_;
  std::vector<sim_time> pending_time_;
  std::vector<std::uint8_t> pending_value_;
  std::vector<std::uint64_t> net_transitions_;
  std::set<std::pair<sim_time, net_id>> queue_;
  std::vector<gate_id> touched_;
  std::vector<hazard_record> hazards_;
  std::vector<trace_entry> trace_;
  sim_time now_{};
  std::uint64_t transitions_{};
  bool tracing_{};
};

/// Builds a quiescent state at the protocol's spacer: input rails and C2 outputs
/// at the spacer level, combinational gates relaxed to their fixpoint.
inline sim_state initialize( std::shared_ptr<const compiled_circuit> circuit, protocol p, delay_model const& delays = unit_delay{} )
{
  auto const& n = circuit->circuit;
  bool const level = spacer_level( p );
  if ( auto report = validate( n, level ); !report.ok() )
  {
    std::string msg = "cannot initialize invalid netlist:";
    for ( auto const& f : report.findings )
      msg += " [" + f.kind + "] " + f.message + ";";
    throw initialization_error( msg );
  }

  std::vector<std::uint8_t> values( n.net_count(), level ? 1 : 0 );
  auto const gates = n.gates();
  auto eval = [&]( gate const& g ) {
    bool const a = values[g.inputs[0]] != 0;
    bool const b = g.inputs.size() > 1 ? values[g.inputs[1]] != 0 : false;
    return evaluate( g.kind, a, b, values[g.output] != 0 );
  };
  std::size_t const max_sweeps = std::max<std::size_t>( 1, gates.size() * 4 );
  bool converged = false;
  for ( std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep )
  {
    converged = true;
    for ( auto const& g : gates )
    {
      if ( !is_combinational( g.kind ) )
        continue;
      bool const v = eval( g );
      if ( ( values[g.output] != 0 ) != v )
      {
        values[g.output] = v ? 1 : 0;
        converged = false;
      }
    }
  }
  if ( !converged )
    throw initialization_error( "combinational relaxation did not converge" );
  for ( auto const& g : gates )
  {
    if ( ( values[g.output] != 0 ) != g.init || eval( g ) != g.init )
      throw initialization_error( "gate " + std::to_string( g.id ) + " settles away from its stored init value" );
  }

  sim_state state( circuit, resolve_delays( delays, n ) );
  state.reset_values( std::move( values ) );
  return state;
}

inline sim_state initialize( netlist const& n, protocol p, delay_model const& delays = unit_delay{} )
{
  return initialize( compile( n ), p, delays );
}

inline std::uint64_t transitions_count( sim_state const& s )
{
  return s.transitions();
}

} // namespace qdi
