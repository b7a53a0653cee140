#pragma once

#include "components.hpp"
#include "encoding.hpp"
#include "multiplier.hpp"
#include "netlist.hpp"
#include "protocol.hpp"
#include "simulator.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qdi
{

/// Oracle implied by a netlist's labels: multipliers and the named components.
inline std::optional<oracle_fn> default_oracle( netlist const& n )
{
  if ( n.label( "design" ) == "array-mult" )
  {
    if ( auto width = n.label( "n" ) )
      return multiplier_oracle( static_cast<unsigned>( std::stoul( *width ) ) );
  }
  if ( auto name = n.label( "component" ) )
    return component_oracle( *name );
  return std::nullopt;
}

/// Widest input count for which every codeword is simulated.
inline constexpr std::size_t exhaustive_input_limit = 10;
/// Random codewords drawn, on top of the all-zero and all-one corners, above the limit.
inline constexpr std::size_t sampled_codewords = 256;

/// Input codewords as bit vectors. Exhaustive (ascending) up to `exhaustive_input_limit`
/// inputs, otherwise the two corners followed by a seeded sample.
inline std::vector<std::vector<bool>> codeword_set( std::size_t inputs, std::uint64_t seed = 42 )
{
  std::vector<std::vector<bool>> out;
  if ( inputs <= exhaustive_input_limit )
  {
    for ( std::uint64_t v = 0; v < ( std::uint64_t{ 1 } << inputs ); ++v )
      out.push_back( unpack_bits( v, inputs ) );
    return out;
  }
  out.emplace_back( inputs, false );
  out.emplace_back( inputs, true );
  std::mt19937_64 rng( seed );
  std::bernoulli_distribution coin;
  for ( std::size_t k = 0; k < sampled_codewords; ++k )
  {
    std::vector<bool> v( inputs );
    for ( std::size_t i = 0; i < inputs; ++i )
      v[i] = coin( rng );
    out.push_back( std::move( v ) );
  }
  return out;
}

struct latency_summary
{
  transaction_metrics worst; // max FL, max RL, their sum, max transitions
  double mean_transitions{};
  std::size_t vectors{};
};

inline latency_summary measure_latencies( handshake_env const& env, delay_model const& delays = unit_delay{}, std::uint64_t seed = 42 )
{
  auto state = initialize( env, delays );
  latency_summary s;
  std::uint64_t total = 0;
  for ( auto const& v : codeword_set( env.inputs.size(), seed ) )
  {
    auto const r = run_transaction( state, env, v );
    s.worst.forward_latency = std::max( s.worst.forward_latency, r.metrics.forward_latency );
    s.worst.reverse_latency = std::max( s.worst.reverse_latency, r.metrics.reverse_latency );
    s.worst.transitions = std::max( s.worst.transitions, r.metrics.transitions );
    total += r.metrics.transitions;
    ++s.vectors;
  }
  s.worst.cycle_time = s.worst.forward_latency + s.worst.reverse_latency;
  s.mean_transitions = s.vectors ? static_cast<double>( total ) / static_cast<double>( s.vectors ) : 0.0;
  return s;
}

inline latency_summary measure_latencies( netlist const& n, protocol p, delay_model const& delays = unit_delay{}, std::uint64_t seed = 42 )
{
  return measure_latencies( make_environment( n, p ), delays, seed );
}

// ---------------------------------------------------------------------------
// indication classification

enum class indication : unsigned char
{
  strong,
  weak,
  neither
};

constexpr std::string_view to_string( indication i )
{
  switch ( i )
  {
  case indication::strong:
    return "Strong";
  case indication::weak:
    return "Weak";
  case indication::neither:
    return "Neither";
  }
  return "?";
}

/// A replayable scenario: the codeword, the groups of inputs in arrival order, and
/// the phase and step at which the evidence showed up.
struct indication_witness
{
  std::vector<std::pair<std::string, bool>> codeword;
  std::vector<std::vector<std::string>> arrival;
  bool data_phase{ true };
  std::size_t step{};                // index into `arrival` after which it was observed
  std::vector<std::string> outputs;  // outputs that completed early
  std::string description;
};

struct indication_verdict
{
  indication kind{ indication::strong };
  std::optional<indication_witness> witness;
  std::size_t scenarios{};
  bool exhaustive{};
};

/// Input counts up to this use every arrival permutation; larger circuits withhold
/// one input at a time instead.
inline constexpr std::size_t permutation_input_limit = 5;

namespace detail
{

struct indication_scenario
{
  std::vector<bool> codeword;
  std::vector<std::vector<std::size_t>> steps; // indices into the input list
};

inline std::vector<indication_scenario> indication_scenarios( std::size_t inputs, bool exhaustive )
{
  std::vector<indication_scenario> out;
  auto const codewords = std::uint64_t{ 1 } << inputs;
  for ( auto v = codewords; v-- > 0; )
  {
    auto const cw = unpack_bits( v, inputs );
    if ( exhaustive )
    {
      std::vector<std::size_t> order( inputs );
      std::iota( order.begin(), order.end(), 0 );
      do
      {
        indication_scenario s{ cw, {} };
        for ( auto i : order )
          s.steps.push_back( { i } );
        out.push_back( std::move( s ) );
      } while ( std::next_permutation( order.begin(), order.end() ) );
    }
    else
    {
      for ( std::size_t held = 0; held < inputs; ++held )
      {
        indication_scenario s{ cw, { {}, { held } } };
        for ( std::size_t i = 0; i < inputs; ++i )
        {
          if ( i != held )
            s.steps[0].push_back( i );
        }
        out.push_back( std::move( s ) );
      }
    }
  }
  return out;
}

} // namespace detail

/// Applies inputs group by group, settling in between, and watches the outputs.
/// Strong: no output moves before the last input in either phase. Weak: some output
/// may finish early, but never all of them. Anything else, including functional
/// failures, is Neither.
inline indication_verdict classify_indication( netlist const& component, protocol p )
{
  auto const inputs = component.input_ports();
  auto const constants = component.constant_ports();
  auto const outputs = component.output_ports();
  if ( inputs.empty() || outputs.empty() )
    throw contract_error( "classification needs input and output ports" );

  indication_verdict verdict;
  verdict.exhaustive = inputs.size() <= permutation_input_limit;
  auto const base = initialize( component, p );
  auto const scenarios = detail::indication_scenarios( inputs.size(), verdict.exhaustive );
  verdict.scenarios = scenarios.size();

  auto port_name = [&]( std::size_t input ) { return component.ports()[inputs[input]].name; };
  auto make_witness = [&]( detail::indication_scenario const& sc, bool data, std::size_t step, std::vector<std::string> early,
                           std::string description ) {
    indication_witness w;
    for ( std::size_t i = 0; i < inputs.size(); ++i )
      w.codeword.emplace_back( port_name( i ), sc.codeword[i] );
    for ( auto const& group : sc.steps )
    {
      std::vector<std::string> names;
      for ( auto i : group )
        names.push_back( port_name( i ) );
      w.arrival.push_back( std::move( names ) );
    }
    w.data_phase = data;
    w.step = step;
    w.outputs = std::move( early );
    w.description = std::move( description );
    return w;
  };

  std::optional<indication_witness> early_witness;
  for ( auto const& sc : scenarios )
  {
    auto state = base;
    for ( bool data : { true, false } )
    {
      std::vector<rail_values> start;
      for ( auto o : outputs )
        start.push_back( { state.value( component.ports()[o].rail1 ), state.value( component.ports()[o].rail0 ) } );

      for ( std::size_t step = 0; step < sc.steps.size(); ++step )
      {
        std::vector<assignment> as;
        auto drive = [&]( dual_rail_port const& port, bool bit ) {
          auto const v = data ? encode( p, bit ) : spacer_rails( p );
          as.push_back( { port.rail1, v.rail1 } );
          as.push_back( { port.rail0, v.rail0 } );
        };
        if ( step == 0 )
        {
          for ( auto c : constants )
            drive( component.ports()[c], *component.ports()[c].const_value );
        }
        for ( auto i : sc.steps[step] )
          drive( component.ports()[inputs[i]], sc.codeword[i] );

        settle_report settled;
        try
        {
          settled = state.apply_and_settle( as );
        }
        catch ( simulation_error const& e )
        {
          verdict.kind = indication::neither;
          verdict.witness = make_witness( sc, data, step, {}, e.what() );
          return verdict;
        }
        if ( !settled.hazards.empty() )
        {
          verdict.kind = indication::neither;
          verdict.witness = make_witness( sc, data, step, {}, "hazard: " + settled.hazards.front().description );
          return verdict;
        }

        bool const last = step + 1 == sc.steps.size();
        std::vector<std::string> moved;
        std::size_t complete = 0;
        for ( std::size_t k = 0; k < outputs.size(); ++k )
        {
          auto const& port = component.ports()[outputs[k]];
          rail_values const now{ state.value( port.rail1 ), state.value( port.rail0 ) };
          auto const c = decode( p, now );
          if ( c.is_illegal() )
          {
            verdict.kind = indication::neither;
            verdict.witness = make_witness( sc, data, step, { port.name }, "output " + port.name + " decodes Illegal" );
            return verdict;
          }
          if ( data ? c.is_data() : c.is_spacer() )
            ++complete;
          if ( !( now == start[k] ) )
            moved.push_back( port.name );
        }
        if ( last )
        {
          if ( complete != outputs.size() )
          {
            verdict.kind = indication::neither;
            verdict.witness = make_witness( sc, data, step, {}, "outputs incomplete after the last input" );
            return verdict;
          }
        }
        else if ( complete == outputs.size() )
        {
          verdict.kind = indication::neither;
          verdict.witness = make_witness( sc, data, step, moved, "every output completed before the last input" );
          return verdict;
        }
        else if ( !moved.empty() && !early_witness )
        {
          early_witness = make_witness( sc, data, step, moved, "output completed before the last input" );
        }
      }
    }
  }
  if ( early_witness )
  {
    verdict.kind = indication::weak;
    verdict.witness = std::move( early_witness );
  }
  return verdict;
}

/// Re-runs a witness up to and including its recorded step; returns the decoded outputs.
inline std::vector<codeword_state> replay_witness( netlist const& component, protocol p, indication_witness const& w )
{
  auto state = initialize( component, p );
  std::map<std::string, bool> bits( w.codeword.begin(), w.codeword.end() );
  auto drive_step = [&]( std::vector<std::string> const& names, bool data, bool first ) {
    std::vector<assignment> as;
    auto drive = [&]( dual_rail_port const& port, bool bit ) {
      auto const v = data ? encode( p, bit ) : spacer_rails( p );
      as.push_back( { port.rail1, v.rail1 } );
      as.push_back( { port.rail0, v.rail0 } );
    };
    if ( first )
    {
      for ( auto c : component.constant_ports() )
        drive( component.ports()[c], *component.ports()[c].const_value );
    }
    for ( auto const& name : names )
      drive( component.ports()[*component.find_port( name )], bits.at( name ) );
    state.apply_and_settle( as );
  };
  for ( bool data : { true, false } )
  {
    for ( std::size_t step = 0; step < w.arrival.size(); ++step )
    {
      drive_step( w.arrival[step], data, step == 0 );
      if ( data == w.data_phase && step == w.step )
      {
        std::vector<codeword_state> out;
        for ( auto o : component.output_ports() )
          out.push_back( decode( p, state.value( component.ports()[o].rail1 ), state.value( component.ports()[o].rail0 ) ) );
        return out;
      }
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// orphan scanning

struct orphan_options
{
  std::size_t trials{ 1000 };
  std::size_t transactions{ 8 };
  std::uint64_t seed{ 42 };
  std::uint32_t min_delay{ 1 };
  std::uint32_t max_delay{ 16 };
  std::optional<oracle_fn> oracle; // defaults to the labelled oracle, else unit-delay replay
};

struct orphan_violation
{
  std::size_t trial{};
  std::uint64_t trial_seed{};
  std::size_t transaction{};
  std::string phase;
  std::string kind;
  std::string detail;
};

struct orphan_report
{
  std::size_t trials{};
  std::size_t transactions{};
  std::uint64_t hazards{};
  std::uint64_t post_completion{};
  std::uint64_t functional{};
  std::vector<orphan_violation> violations;

  bool clean() const { return violations.empty(); }
};

inline std::uint64_t splitmix64( std::uint64_t x )
{
  x += 0x9E3779B97F4A7C15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xBF58476D1CE4E5B9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94D049BB133111EBull;
  return x ^ ( x >> 31 );
}

inline std::uint64_t trial_seed( std::uint64_t seed, std::size_t trial )
{
  return splitmix64( seed ^ splitmix64( trial ) );
}

/// Fuzzes a datapath under random per-gate delays. Each trial redraws every gate's
/// delay and runs a random transaction sequence; any disabled excitation, datapath
/// activity still pending when the outputs complete, or wrong output is a violation.
inline orphan_report orphan_scan( netlist const& datapath, protocol p, orphan_options const& opt = {} )
{
  if ( opt.trials < 1 )
    throw contract_error( "orphan_scan needs at least one trial" );
  auto const env = make_environment( datapath, p );
  auto oracle = opt.oracle ? opt.oracle : default_oracle( datapath );
  if ( !oracle )
  {
    // delay-insensitive circuits must agree with their own unit-delay behaviour
    auto reference = std::make_shared<sim_state>( initialize( env ) );
    oracle = [env, reference]( std::vector<bool> const& in ) { return run_transaction( *reference, env, in ).outputs; };
  }

  orphan_report report;
  report.trials = opt.trials;
  for ( std::size_t trial = 0; trial < opt.trials; ++trial )
  {
    auto const ts = trial_seed( opt.seed, trial );
    auto state = initialize( env, random_uniform_delay{ opt.min_delay, opt.max_delay, ts } );
    std::mt19937_64 rng( splitmix64( ts ) );
    std::bernoulli_distribution coin;

    auto violation = [&]( std::size_t tx, bool data, std::string kind, std::string detail ) {
      report.violations.push_back( { trial, ts, tx, data ? "data" : "return", std::move( kind ), std::move( detail ) } );
    };
    bool broken = false;
    for ( std::size_t tx = 0; tx < opt.transactions && !broken; ++tx )
    {
      std::vector<bool> bits( env.inputs.size() );
      for ( std::size_t i = 0; i < bits.size(); ++i )
        bits[i] = coin( rng );
      auto const expected = ( *oracle )( bits );
      ++report.transactions;

      for ( bool data : { true, false } )
      {
        phase_report r;
        try
        {
          r = run_phase( state, env, data ? &bits : nullptr );
        }
        catch ( simulation_error const& e )
        {
          violation( tx, data, "livelock", e.what() );
          ++report.functional;
          broken = true;
          break;
        }
        for ( auto const& h : r.datapath_hazards )
        {
          violation( tx, data, "hazard", h.description );
          ++report.hazards;
        }
        if ( !r.pending_at_completion.empty() )
        {
          std::string nets;
          for ( auto n : r.pending_at_completion )
            nets += ( nets.empty() ? "n" : ", n" ) + std::to_string( n );
          violation( tx, data, "post-completion", "datapath still switching at output completion: " + nets );
          ++report.post_completion;
        }
        if ( !r.repeated_transitions.empty() )
          violation( tx, data, "non-monotonic", std::to_string( r.repeated_transitions.size() ) + " datapath nets switched more than once" );

        bool complete = r.completion.has_value();
        for ( std::size_t k = 0; k < r.outputs.size(); ++k )
        {
          auto const& c = r.outputs[k];
          bool const ok = data ? c.is_data() && c.value == expected.at( k ) : c.is_spacer();
          if ( !ok )
          {
            complete = complete && ( data ? c.is_data() : c.is_spacer() );
            violation( tx, data, "functional",
                       "output " + env.port( env.outputs[k] ).name + " is " + to_string( c ) +
                           ( data ? std::string( ", expected Data(" ) + ( expected.at( k ) ? "1)" : "0)" ) : std::string( ", expected Spacer" ) ) );
            ++report.functional;
          }
        }
        if ( !r.ack_reached )
          violation( tx, data, "handshake", "acknowledgment did not toggle" );
        if ( !complete || !r.ack_reached )
        {
          broken = true;
          break;
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// exhaustive verification

struct verify_failure
{
  std::vector<bool> inputs;
  std::vector<bool> expected;
  std::vector<bool> actual;
  std::string error;
};

struct verify_report
{
  std::size_t total{};
  std::size_t passed{};
  std::vector<verify_failure> failures;

  bool ok() const { return total == passed; }
};

inline constexpr std::size_t max_verify_inputs = 16;

inline verify_report exhaustive_verify( netlist const& n, protocol p, oracle_fn const& oracle, delay_model const& delays = unit_delay{} )
{
  auto const env = make_environment( n, p );
  if ( env.inputs.size() > max_verify_inputs )
    throw contract_error( "exhaustive_verify supports at most 2^16 codewords" );
  verify_report report;
  auto state = initialize( env, delays );
  for ( std::uint64_t v = 0; v < ( std::uint64_t{ 1 } << env.inputs.size() ); ++v )
  {
    auto const bits = unpack_bits( v, env.inputs.size() );
    auto const expected = oracle( bits );
    ++report.total;
    try
    {
      auto const r = run_transaction( state, env, bits );
      if ( r.outputs == expected )
        ++report.passed;
      else
        report.failures.push_back( { bits, expected, r.outputs, {} } );
    }
    catch ( simulation_error const& e )
    {
      report.failures.push_back( { bits, expected, {}, e.what() } );
      state = initialize( env, delays );
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// benchmark table

struct bench_design
{
  std::string name;
  std::function<netlist( protocol )> build;
};

struct bench_row
{
  std::string design;
  protocol proto{};
  sim_time cycle_units{};
  double area_proxy{};
  double transitions_per_cycle{};
  double pctp{};
  double pctp_norm{};
};

struct bench_result
{
  std::vector<bench_row> rows;
  std::vector<std::string> errors; // designs dropped because they failed verification
};

/// Relative metrics per design and protocol. The power-cycle-time product is proxied
/// by transitions per cycle times cycle time and normalised by the worst design of
/// each protocol group.
inline bench_result benchmark( std::vector<bench_design> const& designs, std::vector<protocol> const& protocols,
                               delay_model const& delays = unit_delay{}, area_weights const& weights = {} )
{
  bench_result result;
  for ( auto p : protocols )
  {
    std::vector<bench_row> group;
    for ( auto const& d : designs )
    {
      auto const n = d.build( p );
      auto const oracle = default_oracle( n );
      if ( !oracle )
      {
        result.errors.push_back( d.name + " (" + std::string( to_string( p ) ) + "): no oracle" );
        continue;
      }
      auto const verified = exhaustive_verify( n, p, *oracle, delays );
      if ( !verified.ok() )
      {
        result.errors.push_back( d.name + " (" + std::string( to_string( p ) ) + "): " + std::to_string( verified.failures.size() ) +
                                 " vectors failed verification" );
        continue;
      }
      auto const lat = measure_latencies( n, p, delays );
      bench_row row;
      row.design = d.name;
      row.proto = p;
      row.cycle_units = lat.worst.cycle_time;
      row.area_proxy = stats( n, weights ).area_proxy;
      row.transitions_per_cycle = lat.mean_transitions;
      row.pctp = row.transitions_per_cycle * static_cast<double>( row.cycle_units );
      group.push_back( std::move( row ) );
    }
    double worst = 0.0;
    for ( auto const& r : group )
      worst = std::max( worst, r.pctp );
    for ( auto& r : group )
      r.pctp_norm = worst > 0.0 ? r.pctp / worst : 0.0;
    std::stable_sort( group.begin(), group.end(), []( auto const& a, auto const& b ) {
      return a.pctp_norm != b.pctp_norm ? a.pctp_norm < b.pctp_norm : a.design < b.design;
    } );
    result.rows.insert( result.rows.end(), group.begin(), group.end() );
  }
  return result;
}

inline std::vector<bench_design> multiplier_designs( unsigned n )
{
  std::vector<bench_design> out;
  for ( auto v : { fa_variant::dims, fa_variant::weak } )
  {
    out.push_back( { "array_mult_" + std::to_string( n ) + "x" + std::to_string( n ) + "_" + std::string( to_string( v ) ),
                     [n, v]( protocol p ) { return array_multiplier( { n, p, v } ); } } );
  }
  return out;
}

} // namespace qdi
