#pragma once

#include "analysis.hpp"
#include "netlist_io.hpp"
#include "report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qdi::cli
{

enum exit_code : int
{
  success = 0,
  property_failure = 1,
  usage = 2
};

class usage_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Every key accepted in a config file; each one also exists as `--key` (with
/// underscores spelled as dashes).
inline std::vector<std::string> const& config_keys()
{
  static std::vector<std::string> const keys{ "protocol", "n", "fa", "delay", "delay_spec", "delay_min", "delay_max",
                                              "seed", "trials", "transactions", "component", "netlist", "weights",
                                              "stimulus", "results", "out", "json", "dot", "trace" };
  return keys;
}

struct cli_config
{
  protocol proto{ protocol::rtz };
  unsigned n{ 4 };
  fa_variant fa{ fa_variant::weak };
  std::string delay{ "unit" };
  std::string delay_spec;
  std::uint32_t delay_min{ 1 };
  std::uint32_t delay_max{ 16 };
  std::uint64_t seed{ 42 };
  std::size_t trials{ 1000 };
  std::size_t transactions{ 8 };
  std::string component;
  std::string netlist;
  std::string weights;
  std::string stimulus;
  std::string results;
  std::string out;
  std::string json;
  std::string dot;
  std::string trace;

  std::map<std::string, std::string> effective; // echoed into reports
};

/// Flat `key = value` file; blank lines and `#` comments are ignored.
inline std::map<std::string, std::string> read_config_file( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw usage_error( "cannot read config file " + path );
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t number = 0;
  auto trim = []( std::string s ) {
    auto const first = s.find_first_not_of( " \t\r" );
    if ( first == std::string::npos )
      return std::string{};
    auto const last = s.find_last_not_of( " \t\r" );
    return s.substr( first, last - first + 1 );
  };
  while ( std::getline( in, line ) )
  {
    ++number;
    if ( auto hash = line.find( '#' ); hash != std::string::npos )
      line.erase( hash );
    line = trim( line );
    if ( line.empty() )
      continue;
    auto const eq = line.find( '=' );
    if ( eq == std::string::npos )
      throw usage_error( path + ":" + std::to_string( number ) + ": expected key=value" );
    auto key = trim( line.substr( 0, eq ) );
    std::replace( key.begin(), key.end(), '-', '_' );
    if ( std::find( config_keys().begin(), config_keys().end(), key ) == config_keys().end() )
      throw usage_error( path + ":" + std::to_string( number ) + ": unknown key " + key );
    kv[key] = trim( line.substr( eq + 1 ) );
  }
  return kv;
}

namespace detail
{

template<typename T>
T parse_number( std::string const& key, std::string const& text )
{
  T value{};
  auto const* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars( text.data(), end, value );
  if ( ec != std::errc{} || ptr != end )
    throw usage_error( "invalid value for " + key + ": \"" + text + "\"" );
  return value;
}

} // namespace detail

inline cli_config make_config( std::map<std::string, std::string> const& kv )
{
  cli_config c;
  auto get = [&]( char const* key ) -> std::optional<std::string> {
    if ( auto it = kv.find( key ); it != kv.end() )
      return it->second;
    return std::nullopt;
  };
  if ( auto v = get( "protocol" ) )
  {
    auto p = parse_protocol( *v );
    if ( !p )
      throw usage_error( "protocol must be rtz or rto" );
    c.proto = *p;
  }
  if ( auto v = get( "n" ) )
    c.n = detail::parse_number<unsigned>( "n", *v );
  if ( c.n < 2 || c.n > 8 )
    throw usage_error( "n must be between 2 and 8" );
  if ( auto v = get( "fa" ) )
  {
    auto f = parse_fa_variant( *v );
    if ( !f )
      throw usage_error( "fa must be dims_fa or weak_fa" );
    c.fa = *f;
  }
  if ( auto v = get( "delay" ) )
    c.delay = *v;
  if ( c.delay != "unit" && c.delay != "perkind" && c.delay != "pergate" && c.delay != "random" )
    throw usage_error( "delay must be unit, perkind, pergate or random" );
  if ( auto v = get( "delay_spec" ) )
    c.delay_spec = *v;
  if ( auto v = get( "delay_min" ) )
    c.delay_min = detail::parse_number<std::uint32_t>( "delay_min", *v );
  if ( auto v = get( "delay_max" ) )
    c.delay_max = detail::parse_number<std::uint32_t>( "delay_max", *v );
  if ( c.delay_min < 1 || c.delay_min > c.delay_max )
    throw usage_error( "delay range must satisfy 1 <= delay_min <= delay_max" );
  if ( auto v = get( "seed" ) )
    c.seed = detail::parse_number<std::uint64_t>( "seed", *v );
  if ( auto v = get( "trials" ) )
    c.trials = detail::parse_number<std::size_t>( "trials", *v );
  if ( c.trials < 1 )
    throw usage_error( "trials must be at least 1" );
  if ( auto v = get( "transactions" ) )
    c.transactions = detail::parse_number<std::size_t>( "transactions", *v );
  if ( c.transactions < 1 )
    throw usage_error( "transactions must be at least 1" );
  if ( auto v = get( "component" ) )
  {
    c.component = *v;
    if ( std::find( component_names.begin(), component_names.end(), c.component ) == component_names.end() )
      throw usage_error( "unknown component " + c.component );
  }
  for ( auto [key, field] : { std::pair{ "netlist", &c.netlist }, std::pair{ "weights", &c.weights },
                              std::pair{ "stimulus", &c.stimulus }, std::pair{ "results", &c.results },
                              std::pair{ "out", &c.out }, std::pair{ "json", &c.json }, std::pair{ "dot", &c.dot },
                              std::pair{ "trace", &c.trace } } )
  {
    if ( auto v = get( key ) )
      *field = *v;
  }

  c.effective = {
      { "protocol", std::string( to_string( c.proto ) ) },
      { "n", std::to_string( c.n ) },
      { "fa", std::string( to_string( c.fa ) ) },
      { "delay", c.delay },
      { "delay_min", std::to_string( c.delay_min ) },
      { "delay_max", std::to_string( c.delay_max ) },
      { "seed", std::to_string( c.seed ) },
      { "trials", std::to_string( c.trials ) },
      { "transactions", std::to_string( c.transactions ) },
  };
  for ( auto const& key : { "delay_spec", "component", "netlist", "weights", "stimulus" } )
  {
    if ( auto v = get( key ) )
      c.effective[key] = *v;
  }
  return c;
}

namespace detail
{

/// "C2=2,OR2=1" for perkind, "0=3,17=2" (gate id = delay) for pergate.
inline std::vector<std::pair<std::string, std::uint32_t>> parse_delay_spec( std::string const& spec )
{
  std::vector<std::pair<std::string, std::uint32_t>> out;
  std::stringstream ss( spec );
  std::string item;
  while ( std::getline( ss, item, ',' ) )
  {
    if ( item.empty() )
      continue;
    auto const eq = item.find( '=' );
    if ( eq == std::string::npos )
      throw usage_error( "delay_spec entries look like key=delay" );
    auto const d = parse_number<std::uint32_t>( "delay_spec", item.substr( eq + 1 ) );
    if ( d < 1 )
      throw usage_error( "delays must be at least 1" );
    out.emplace_back( item.substr( 0, eq ), d );
  }
  return out;
}

} // namespace detail

inline delay_model make_delay_model( cli_config const& c )
{
  if ( c.delay == "perkind" )
  {
    per_kind_delay m;
    for ( auto const& [key, d] : detail::parse_delay_spec( c.delay_spec ) )
    {
      auto kind = parse_gate_kind( key );
      if ( !kind )
        throw usage_error( "unknown gate kind in delay_spec: " + key );
      m.delays[*kind] = d;
    }
    return m;
  }
  if ( c.delay == "pergate" )
  {
    per_gate_delay m;
    for ( auto const& [key, d] : detail::parse_delay_spec( c.delay_spec ) )
      m.delays[detail::parse_number<gate_id>( "delay_spec", key )] = d;
    return m;
  }
  if ( c.delay == "random" )
    return random_uniform_delay{ c.delay_min, c.delay_max, c.seed };
  return unit_delay{};
}

inline area_weights load_weights( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw usage_error( "cannot read weights file " + path );
  area_weights w;
  try
  {
    auto const doc = nlohmann::json::parse( in );
    for ( auto const& [key, value] : doc.items() )
    {
      auto kind = parse_gate_kind( key );
      if ( !kind )
        throw usage_error( "unknown gate kind in weights: " + key );
      w[*kind] = value.get<double>();
    }
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw usage_error( std::string( "malformed weights file: " ) + e.what() );
  }
  return w;
}

inline std::string read_file( std::string const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw usage_error( "cannot read " + path );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file( std::string const& path, std::string const& content )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out || !( out << content ) )
    throw std::runtime_error( "cannot write " + path );
}

struct design
{
  netlist net;
  protocol proto;
};

/// The netlist a command works on: a file, a named component, or the array multiplier.
inline design select_design( cli_config const& c )
{
  if ( !c.netlist.empty() )
  {
    try
    {
      auto n = deserialize( read_file( c.netlist ) );
      auto p = c.proto;
      if ( auto label = n.label( "protocol" ) )
      {
        if ( auto parsed = parse_protocol( *label ) )
          p = *parsed;
      }
      return { std::move( n ), p };
    }
    catch ( format_error const& e )
    {
      throw usage_error( c.netlist + ": " + e.what() );
    }
  }
  if ( !c.component.empty() )
    return { *make_component( c.component, c.proto ), c.proto };
  return { array_multiplier( { c.n, c.proto, c.fa } ), c.proto };
}

inline nlohmann::json report_header( cli_config const& c, std::string const& command )
{
  return { { "command", command }, { "config", c.effective } };
}

inline void emit_report( cli_config const& c, nlohmann::json const& report )
{
  if ( !c.out.empty() )
    write_file( c.out, report.dump( 2 ) + "\n" );
}

inline int cmd_build( cli_config const& c, std::ostream& out )
{
  auto const d = select_design( c );
  auto const s = stats( d.net );
  out << "design " << d.net.name() << " (" << to_string( d.proto ) << ")\n";
  if ( auto v = d.net.label( "and_blocks" ) )
    out << "AND blocks: " << *v << "\n";
  if ( auto v = d.net.label( "fa_blocks" ) )
    out << "FA blocks: " << *v << "\n";
  if ( auto v = d.net.label( "const_carries" ) )
    out << "constant carries: " << *v << "\n";
  out << "gates: " << s.total;
  for ( auto kind : all_gate_kinds )
    out << ' ' << to_string( kind ) << '=' << s.count( kind );
  out << "\nnets: " << d.net.net_count() << "\n";
  auto const v = validate( d.net );
  out << "validation: " << ( v.ok() ? "ok" : std::to_string( v.findings.size() ) + " findings" ) << "\n";
  if ( !c.out.empty() )
    write_file( c.out, serialize( d.net ) );
  if ( !c.dot.empty() )
    write_file( c.dot, to_dot( d.net ) );
  return v.ok() ? success : property_failure;
}

inline int cmd_verify( cli_config const& c, std::ostream& out )
{
  auto const d = select_design( c );
  auto const oracle = default_oracle( d.net );
  if ( !oracle )
    throw usage_error( "no reference function known for design " + d.net.name() );
  auto const r = exhaustive_verify( d.net, d.proto, *oracle, make_delay_model( c ) );
  out << "verify " << d.net.name() << " (" << to_string( d.proto ) << "): " << r.passed << "/" << r.total << " vectors pass\n";
  for ( std::size_t i = 0; i < r.failures.size() && i < 8; ++i )
  {
    auto const& f = r.failures[i];
    out << "  FAIL inputs=" << bits_string( f.inputs ) << " expected=" << bits_string( f.expected );
    if ( f.error.empty() )
      out << " actual=" << bits_string( f.actual ) << "\n";
    else
      out << " error=" << f.error << "\n";
  }
  auto report = report_header( c, "verify" );
  report["design"] = d.net.name();
  report["result"] = to_json( r );
  emit_report( c, report );
  return r.ok() ? success : property_failure;
}

inline int cmd_bench( cli_config const& c, std::ostream& out )
{
  area_weights weights;
  if ( !c.weights.empty() )
    weights = load_weights( c.weights );
  auto const result = benchmark( multiplier_designs( c.n ), { protocol::rtz, protocol::rto }, make_delay_model( c ), weights );
  auto const csv = bench_csv( result.rows );
  if ( c.out.empty() )
    out << csv;
  else
    write_file( c.out, csv );
  if ( !c.json.empty() )
  {
    auto report = report_header( c, "bench" );
    report["result"] = to_json( result );
    write_file( c.json, report.dump( 2 ) + "\n" );
  }
  for ( auto const& e : result.errors )
    out << "dropped: " << e << "\n";
  return result.errors.empty() ? success : property_failure;
}

inline int cmd_classify( cli_config const& c, std::ostream& out )
{
  auto const d = select_design( c );
  auto const v = classify_indication( d.net, d.proto );
  out << d.net.name() << " (" << to_string( d.proto ) << "): " << describe( v ) << "\n";
  auto report = report_header( c, "classify" );
  report["design"] = d.net.name();
  report["result"] = to_json( v );
  emit_report( c, report );
  return v.kind == indication::neither ? property_failure : success;
}

inline int cmd_fuzz( cli_config const& c, std::ostream& out )
{
  auto const d = select_design( c );
  orphan_options opt;
  opt.trials = c.trials;
  opt.transactions = c.transactions;
  opt.seed = c.seed;
  opt.min_delay = c.delay_min;
  opt.max_delay = c.delay_max;
  auto const r = orphan_scan( d.net, d.proto, opt );
  out << "fuzz " << d.net.name() << " (" << to_string( d.proto ) << "): " << r.trials << " trials, " << r.transactions
      << " transactions, " << r.violations.size() << " violations\n";
  for ( std::size_t i = 0; i < r.violations.size() && i < 8; ++i )
  {
    auto const& v = r.violations[i];
    out << "  trial " << v.trial << " (replay seed " << v.trial_seed << ") tx " << v.transaction << " " << v.phase << ": " << v.kind
        << ": " << v.detail << "\n";
  }
  auto report = report_header( c, "fuzz" );
  report["design"] = d.net.name();
  report["result"] = to_json( r );
  emit_report( c, report );
  return r.clean() ? success : property_failure;
}

/// Writes the design as JSON/DOT and, given a stimulus file, simulates it and
/// writes one result row per transaction.
inline int cmd_export( cli_config const& c, std::ostream& out )
{
  auto const d = select_design( c );
  if ( !c.out.empty() )
    write_file( c.out, serialize( d.net ) );
  if ( !c.dot.empty() )
    write_file( c.dot, to_dot( d.net ) );
  out << "exported " << d.net.name() << "\n";
  if ( c.stimulus.empty() )
    return success;

  std::vector<std::map<std::string, bool>> vectors;
  try
  {
    auto const doc = nlohmann::json::parse( read_file( c.stimulus ) );
    for ( auto const& entry : doc )
    {
      std::map<std::string, bool> v;
      for ( auto const& [name, bit] : entry.items() )
        v[name] = bit.is_boolean() ? bit.get<bool>() : bit.get<int>() != 0;
      vectors.push_back( std::move( v ) );
    }
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw usage_error( "malformed stimulus file: " + std::string( e.what() ) );
  }

  auto const env = make_environment( d.net, d.proto );
  auto state = initialize( env, make_delay_model( c ) );
  state.enable_trace( !c.trace.empty() );
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "index,inputs,outputs,forward_latency,reverse_latency,cycle_time,transitions\n";
  for ( std::size_t i = 0; i < vectors.size(); ++i )
  {
    std::vector<bool> bits;
    try
    {
      bits = input_values( env, vectors[i] );
    }
    catch ( contract_error const& e )
    {
      throw usage_error( "stimulus " + std::to_string( i ) + ": " + e.what() );
    }
    auto const r = run_transaction( state, env, bits );
    nlohmann::json in = nlohmann::json::object(), outs = nlohmann::json::object();
    std::string in_text, out_text;
    for ( std::size_t k = 0; k < env.inputs.size(); ++k )
    {
      auto const& name = env.port( env.inputs[k] ).name;
      in[name] = bits[k] ? 1 : 0;
      in_text += ( in_text.empty() ? "" : " " ) + name + "=" + ( bits[k] ? "1" : "0" );
    }
    for ( std::size_t k = 0; k < env.outputs.size(); ++k )
    {
      auto const& name = env.port( env.outputs[k] ).name;
      outs[name] = r.outputs[k] ? 1 : 0;
      out_text += ( out_text.empty() ? "" : " " ) + name + "=" + ( r.outputs[k] ? "1" : "0" );
    }
    auto row = to_json( r.metrics );
    row["inputs"] = std::move( in );
    row["outputs"] = std::move( outs );
    rows.push_back( std::move( row ) );
    csv << i << ',' << in_text << ',' << out_text << ',' << r.metrics.forward_latency << ',' << r.metrics.reverse_latency << ','
        << r.metrics.cycle_time << ',' << r.metrics.transitions << '\n';
  }
  out << "simulated " << vectors.size() << " transactions\n";
  if ( !c.results.empty() )
  {
    if ( c.results.ends_with( ".csv" ) )
      write_file( c.results, csv.str() );
    else
    {
      auto report = report_header( c, "export" );
      report["design"] = d.net.name();
      report["transactions"] = std::move( rows );
      write_file( c.results, report.dump( 2 ) + "\n" );
    }
  }
  else
  {
    out << csv.str();
  }
  if ( !c.trace.empty() )
    write_file( c.trace, trace_csv( state.trace() ) );
  return success;
}

/// Entry point shared by the executable and the tests.
inline int run( int argc, char const* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr )
{
  CLI::App app{ "Gate-level laboratory for indicating dual-rail asynchronous circuits" };
  app.require_subcommand( 1 );
  std::string config_path;
  std::map<std::string, std::string> flags;

  struct command
  {
    char const* name;
    char const* help;
    int ( *fn )( cli_config const&, std::ostream& );
  };
  std::vector<command> const commands{
      { "build", "generate a netlist and print its statistics", cmd_build },
      { "verify", "simulate every input codeword against the reference function", cmd_verify },
      { "bench", "relative benchmark table over FA variants and protocols", cmd_bench },
      { "classify", "strong/weak indication verdict with a witness", cmd_classify },
      { "fuzz", "random-delay orphan and hazard scan", cmd_fuzz },
      { "export", "write JSON/DOT, optionally simulate a stimulus file", cmd_export },
  };
  std::vector<CLI::App*> subs;
  for ( auto const& cmd : commands )
  {
    auto* sub = app.add_subcommand( cmd.name, cmd.help );
    sub->add_option( "--config", config_path, "flat key=value configuration file" );
    for ( auto const& key : config_keys() )
    {
      auto flag = key;
      std::replace( flag.begin(), flag.end(), '_', '-' );
      sub->add_option( "--" + flag, flags[key] );
    }
    subs.push_back( sub );
  }

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::CallForHelp const& e )
  {
    out << app.help();
    return success;
  }
  catch ( CLI::ParseError const& e )
  {
    err << "error: " << e.what() << "\n";
    return usage;
  }

  try
  {
    for ( std::size_t i = 0; i < subs.size(); ++i )
    {
      if ( !subs[i]->parsed() )
        continue;
      std::map<std::string, std::string> kv;
      if ( !config_path.empty() )
        kv = read_config_file( config_path );
      for ( auto const& key : config_keys() )
      {
        auto flag = key;
        std::replace( flag.begin(), flag.end(), '_', '-' );
        if ( subs[i]->count( "--" + flag ) > 0 )
          kv[key] = flags[key];
      }
      auto const config = make_config( kv );
      return commands[i].fn( config, out );
    }
  }
  catch ( usage_error const& e )
  {
    err << "error: " << e.what() << "\n";
    return usage;
  }
  catch ( std::exception const& e )
  {
    err << "error: " << e.what() << "\n";
    return property_failure;
  }
  return usage;
}

} // namespace qdi::cli
