#pragma once

#include "analysis.hpp"
#include "netlist_io.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>
#include <string>

namespace qdi
{

inline std::string fixed( double v, int digits )
{
  std::ostringstream os;
  os << std::fixed << std::setprecision( digits ) << v;
  return os.str();
}

inline nlohmann::json to_json( transaction_metrics const& m )
{
  return { { "forward_latency", m.forward_latency },
           { "reverse_latency", m.reverse_latency },
           { "cycle_time", m.cycle_time },
           { "transitions", m.transitions } };
}

inline std::string bits_string( std::vector<bool> const& bits )
{
  // MSB first, as a binary literal would read
  std::string s;
  for ( auto it = bits.rbegin(); it != bits.rend(); ++it )
    s.push_back( *it ? '1' : '0' );
  return s;
}

inline nlohmann::json to_json( verify_report const& r )
{
  nlohmann::json failures = nlohmann::json::array();
  for ( auto const& f : r.failures )
  {
    nlohmann::json jf{ { "inputs", bits_string( f.inputs ) }, { "expected", bits_string( f.expected ) } };
    if ( f.error.empty() )
      jf["actual"] = bits_string( f.actual );
    else
      jf["error"] = f.error;
    failures.push_back( std::move( jf ) );
  }
  return { { "total", r.total }, { "passed", r.passed }, { "ok", r.ok() }, { "failures", std::move( failures ) } };
}

inline nlohmann::json to_json( indication_verdict const& v )
{
  nlohmann::json j{ { "verdict", std::string( to_string( v.kind ) ) }, { "scenarios", v.scenarios }, { "mode", v.exhaustive ? "permutations" : "holdback" } };
  if ( v.witness )
  {
    auto const& w = *v.witness;
    nlohmann::json cw = nlohmann::json::object();
    for ( auto const& [name, bit] : w.codeword )
      cw[name] = bit ? 1 : 0;
    j["witness"] = { { "codeword", std::move( cw ) },
                     { "arrival", w.arrival },
                     { "phase", w.data_phase ? "data" : "return" },
                     { "step", w.step },
                     { "outputs", w.outputs },
                     { "description", w.description } };
  }
  return j;
}

inline std::string describe( indication_verdict const& v )
{
  std::ostringstream os;
  os << to_string( v.kind );
  if ( v.witness )
  {
    auto const& w = *v.witness;
    os << " (witness:";
    for ( auto const& [name, bit] : w.codeword )
      os << ' ' << name << '=' << ( bit ? 1 : 0 );
    os << "; arrival";
    for ( auto const& group : w.arrival )
    {
      os << ' ';
      for ( std::size_t i = 0; i < group.size(); ++i )
        os << ( i ? "+" : "" ) << group[i];
    }
    os << "; " << ( w.data_phase ? "data" : "return" ) << " phase after step " << w.step << ": " << w.description;
    if ( !w.outputs.empty() )
    {
      os << " [";
      for ( std::size_t i = 0; i < w.outputs.size(); ++i )
        os << ( i ? " " : "" ) << w.outputs[i];
      os << ']';
    }
    os << ')';
  }
  return os.str();
}

inline nlohmann::json to_json( orphan_report const& r )
{
  nlohmann::json violations = nlohmann::json::array();
  for ( auto const& v : r.violations )
  {
    violations.push_back( { { "trial", v.trial },
                            { "replay_seed", v.trial_seed },
                            { "transaction", v.transaction },
                            { "phase", v.phase },
                            { "kind", v.kind },
                            { "detail", v.detail } } );
  }
  return { { "trials", r.trials },
           { "transactions", r.transactions },
           { "hazards", r.hazards },
           { "post_completion", r.post_completion },
           { "functional", r.functional },
           { "clean", r.clean() },
           { "violations", std::move( violations ) } };
}

inline std::string bench_csv( std::vector<bench_row> const& rows )
{
  std::ostringstream os;
  os << "design,protocol,cycle_units,area_proxy,transitions_per_cycle,pctp_norm\n";
  for ( auto const& r : rows )
  {
    os << r.design << ',' << to_string( r.proto ) << ',' << r.cycle_units << ',' << fixed( r.area_proxy, 2 ) << ','
       << fixed( r.transitions_per_cycle, 3 ) << ',' << fixed( r.pctp_norm, 3 ) << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json( bench_result const& b )
{
  nlohmann::json rows = nlohmann::json::array();
  for ( auto const& r : b.rows )
  {
    rows.push_back( { { "design", r.design },
                      { "protocol", std::string( to_string( r.proto ) ) },
                      { "cycle_units", r.cycle_units },
                      { "area_proxy", r.area_proxy },
                      { "transitions_per_cycle", r.transitions_per_cycle },
                      { "pctp", r.pctp },
                      { "pctp_norm", r.pctp_norm } } );
  }
  return { { "rows", std::move( rows ) }, { "errors", b.errors } };
}

inline std::string trace_csv( std::vector<trace_entry> const& trace )
{
  std::ostringstream os;
  os << "time,net,value\n";
  for ( auto const& t : trace )
    os << t.time << ',' << t.net << ',' << ( t.value ? 1 : 0 ) << '\n';
  return os.str();
}

} // namespace qdi
