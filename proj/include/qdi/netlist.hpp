#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qdi
{

using net_id = std::uint32_t;
using gate_id = std::uint32_t;

class netlist_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class gate_kind : std::uint8_t
{
  and2,
  or2,
  inv,
  c2
};

inline constexpr std::array<gate_kind, 4> all_gate_kinds{ gate_kind::and2, gate_kind::or2, gate_kind::inv, gate_kind::c2 };

constexpr std::size_t arity( gate_kind kind )
{
  return kind == gate_kind::inv ? 1u : 2u;
}

constexpr bool is_combinational( gate_kind kind )
{
  return kind != gate_kind::c2;
}

constexpr std::string_view to_string( gate_kind kind )
{
  switch ( kind )
  {
  case gate_kind::and2:
    return "AND2";
  case gate_kind::or2:
    return "OR2";
  case gate_kind::inv:
    return "INV";
  case gate_kind::c2:
    return "C2";
  }
  return "?";
}

inline std::optional<gate_kind> parse_gate_kind( std::string_view name )
{
  for ( auto kind : all_gate_kinds )
  {
    if ( to_string( kind ) == name )
      return kind;
  }
  return std::nullopt;
}

/// Evaluates a gate given its input values and its current output.
/// The current output only matters for C2, which holds when its inputs disagree.
constexpr bool evaluate( gate_kind kind, bool a, bool b, bool current )
{
  switch ( kind )
  {
  case gate_kind::and2:
    return a && b;
  case gate_kind::or2:
    return a || b;
  case gate_kind::inv:
    return !a;
  case gate_kind::c2:
    return a == b ? a : current;
  }
  return current;
}

struct gate
{
  gate_id id{};
  gate_kind kind{};
  std::vector<net_id> inputs;
  net_id output{};
  bool init{};

  friend bool operator==( gate const&, gate const& ) = default;
};

enum class port_direction : std::uint8_t
{
  input,
  output
};

struct dual_rail
{
  net_id rail1{};
  net_id rail0{};

  friend bool operator==( dual_rail const&, dual_rail const& ) = default;
};

/// A named dual-rail pair. Input ports are driven by the environment; a port with
/// `const_value` set is an environment input that always carries that logical bit.
struct dual_rail_port
{
  std::string name;
  port_direction direction{ port_direction::input };
  net_id rail1{};
  net_id rail0{};
  std::optional<bool> const_value;

  dual_rail rails() const { return { rail1, rail0 }; }
  bool is_input() const { return direction == port_direction::input; }
  bool is_constant() const { return const_value.has_value(); }

  friend bool operator==( dual_rail_port const&, dual_rail_port const& ) = default;
};

/// Gate-level circuit. Immutable once constructed; use `netlist_builder` to make one.
class netlist
{
public:
  netlist() = default;

  netlist( std::string name, std::size_t net_count, std::vector<gate> gates, std::vector<dual_rail_port> ports,
           std::map<std::string, std::string> metadata = {} )
      : name_( std::move( name ) ), net_count_( net_count ), gates_( std::move( gates ) ), ports_( std::move( ports ) ),
        metadata_( std::move( metadata ) )
  {
  }

  std::string const& name() const { return name_; }
  std::size_t net_count() const { return net_count_; }
  std::span<const gate> gates() const { return gates_; }
  std::span<const dual_rail_port> ports() const { return ports_; }
  std::map<std::string, std::string> const& metadata() const { return metadata_; }

  gate const& gate_at( gate_id id ) const { return gates_.at( id ); }

  std::optional<std::string> label( std::string const& key ) const
  {
    if ( auto it = metadata_.find( key ); it != metadata_.end() )
      return it->second;
    return std::nullopt;
  }

  std::optional<std::size_t> find_port( std::string_view port_name ) const
  {
    for ( std::size_t i = 0; i < ports_.size(); ++i )
    {
      if ( ports_[i].name == port_name )
        return i;
    }
    return std::nullopt;
  }

  std::vector<std::size_t> input_ports() const { return select_ports( []( auto const& p ) { return p.is_input() && !p.is_constant(); } ); }
  std::vector<std::size_t> constant_ports() const { return select_ports( []( auto const& p ) { return p.is_input() && p.is_constant(); } ); }
  std::vector<std::size_t> output_ports() const { return select_ports( []( auto const& p ) { return !p.is_input(); } ); }

  friend bool operator==( netlist const&, netlist const& ) = default;

private:
  template<typename Pred>
  std::vector<std::size_t> select_ports( Pred pred ) const
  {
    std::vector<std::size_t> out;
    for ( std::size_t i = 0; i < ports_.size(); ++i )
    {
      if ( pred( ports_[i] ) )
        out.push_back( i );
    }
    return out;
  }

  std::string name_;
  std::size_t net_count_{};
  std::vector<gate> gates_;
  std::vector<dual_rail_port> ports_;
  std::map<std::string, std::string> metadata_;
};

class netlist_builder
{
public:
  explicit netlist_builder( std::string name = {} ) : name_( std::move( name ) ) {}

  net_id add_net() { return static_cast<net_id>( net_count_++ ); }

  /// Creates a fresh environment-driven dual-rail input port.
  dual_rail add_input( std::string port_name, std::optional<bool> const_value = std::nullopt )
  {
    dual_rail rails{ add_net(), add_net() };
    ports_.push_back( { std::move( port_name ), port_direction::input, rails.rail1, rails.rail0, const_value } );
    return rails;
  }

  void add_output( std::string port_name, dual_rail rails )
  {
    check_net( rails.rail1 );
    check_net( rails.rail0 );
    ports_.push_back( { std::move( port_name ), port_direction::output, rails.rail1, rails.rail0, std::nullopt } );
  }

  net_id add_gate( gate_kind kind, std::vector<net_id> inputs, bool init )
  {
    if ( inputs.size() != arity( kind ) )
    {
      throw netlist_error( "arity mismatch: " + std::string( to_string( kind ) ) + " expects " +
                           std::to_string( arity( kind ) ) + " inputs, got " + std::to_string( inputs.size() ) );
    }
    for ( auto n : inputs )
      check_net( n );
    auto const out = add_net();
    gates_.push_back( { static_cast<gate_id>( gates_.size() ), kind, std::move( inputs ), out, init } );
    return out;
  }

  /// Records a gate driving an existing net. No single-driver check happens here;
  /// `validate` reports conflicts.
  void add_gate_driving( gate_kind kind, std::vector<net_id> inputs, net_id output, bool init )
  {
    if ( inputs.size() != arity( kind ) )
      throw netlist_error( "arity mismatch for " + std::string( to_string( kind ) ) );
    for ( auto n : inputs )
      check_net( n );
    check_net( output );
    gates_.push_back( { static_cast<gate_id>( gates_.size() ), kind, std::move( inputs ), output, init } );
  }

  /// Balanced binary tree of `kind` over `nets`. Operands pair up left to right;
  /// a single net is returned untouched.
  net_id reduce_tree( gate_kind kind, std::span<const net_id> nets, bool init )
  {
    if ( nets.empty() )
      throw netlist_error( "reduce_tree: empty net list" );
    if ( arity( kind ) != 2 )
      throw netlist_error( "reduce_tree: gate kind must have two inputs" );
    std::vector<net_id> level( nets.begin(), nets.end() );
    while ( level.size() > 1 )
    {
      std::vector<net_id> next;
      next.reserve( ( level.size() + 1 ) / 2 );
      for ( std::size_t i = 0; i + 1 < level.size(); i += 2 )
        next.push_back( add_gate( kind, { level[i], level[i + 1] }, init ) );
      if ( level.size() % 2 == 1 )
        next.push_back( level.back() );
      level = std::move( next );
    }
    return level.front();
  }

  /// Adds a port over nets that already exist.
  void add_port( dual_rail_port port )
  {
    check_net( port.rail1 );
    check_net( port.rail0 );
    ports_.push_back( std::move( port ) );
  }

  void set_label( std::string key, std::string value ) { metadata_[std::move( key )] = std::move( value ); }

  std::size_t gate_count() const { return gates_.size(); }
  std::size_t net_count() const { return net_count_; }

  /// Splices another netlist in; its nets and gates are renumbered after ours and its
  /// ports are dropped. Returns the net offset so the caller can map port rails.
  net_id append( netlist const& other )
  {
    auto const offset = static_cast<net_id>( net_count_ );
    net_count_ += other.net_count();
    for ( auto const& g : other.gates() )
    {
      auto copy = g;
      copy.id = static_cast<gate_id>( gates_.size() );
      for ( auto& n : copy.inputs )
        n += offset;
      copy.output += offset;
      gates_.push_back( std::move( copy ) );
    }
    return offset;
  }

  netlist build() &&
  {
    return netlist( std::move( name_ ), net_count_, std::move( gates_ ), std::move( ports_ ), std::move( metadata_ ) );
  }

private:
  void check_net( net_id n ) const
  {
    if ( n >= net_count_ )
      throw netlist_error( "unknown net n" + std::to_string( n ) );
  }

  std::string name_;
  std::size_t net_count_{};
  std::vector<gate> gates_;
  std::vector<dual_rail_port> ports_;
  std::map<std::string, std::string> metadata_;
};

/// Depth of the tree `reduce_tree` builds over `count` leaves.
constexpr std::size_t tree_depth( std::size_t count )
{
  std::size_t depth = 0;
  for ( std::size_t width = 1; width < count; width *= 2 )
    ++depth;
  return depth;
}

struct validation_finding
{
  std::string kind;
  std::string message;
};

struct validation_report
{
  std::vector<validation_finding> findings;

  bool ok() const { return findings.empty(); }
  bool has( std::string_view kind ) const
  {
    return std::any_of( findings.begin(), findings.end(), [&]( auto const& f ) { return f.kind == kind; } );
  }
};

/// Reset level of environment-driven nets: taken from the "protocol" label
/// (rto rests at 1, anything else at 0).
inline bool rest_level( netlist const& n )
{
  auto const p = n.label( "protocol" );
  return p && *p == "rto";
}

/// Per-net driver map; `driver[n]` is the gate driving net n, if any.
inline std::vector<std::optional<gate_id>> gate_drivers( netlist const& n )
{
  std::vector<std::optional<gate_id>> driver( n.net_count() );
  for ( auto const& g : n.gates() )
  {
    if ( g.output < driver.size() && !driver[g.output] )
      driver[g.output] = g.id;
  }
  return driver;
}

/// Fanout lists: gates reading each net, ascending by gate id, without duplicates.
inline std::vector<std::vector<gate_id>> gate_fanouts( netlist const& n )
{
  std::vector<std::vector<gate_id>> fanout( n.net_count() );
  for ( auto const& g : n.gates() )
  {
    for ( auto in : g.inputs )
    {
      if ( in < fanout.size() && ( fanout[in].empty() || fanout[in].back() != g.id ) )
        fanout[in].push_back( g.id );
    }
  }
  return fanout;
}

inline validation_report validate( netlist const& n, std::optional<bool> environment_level = std::nullopt )
{
  validation_report report;
  auto add = [&]( std::string kind, std::string msg ) { report.findings.push_back( { std::move( kind ), std::move( msg ) } ); };
  auto const nets = n.net_count();
  auto exists = [&]( net_id id ) { return id < nets; };

  bool references_ok = true;
  for ( std::size_t i = 0; i < n.gates().size(); ++i )
  {
    auto const& g = n.gates()[i];
    if ( g.id != i )
      add( "gate id", "gate at position " + std::to_string( i ) + " has id " + std::to_string( g.id ) );
    if ( g.inputs.size() != arity( g.kind ) )
      add( "arity", "gate " + std::to_string( g.id ) + " has wrong input count" );
    for ( auto in : g.inputs )
    {
      if ( !exists( in ) )
      {
        add( "dangling net", "gate " + std::to_string( g.id ) + " reads net " + std::to_string( in ) );
        references_ok = false;
      }
    }
    if ( !exists( g.output ) )
    {
      add( "dangling net", "gate " + std::to_string( g.id ) + " drives net " + std::to_string( g.output ) );
      references_ok = false;
    }
  }

  std::vector<int> drivers( nets, 0 );
  std::vector<bool> port_driven( nets, false );
  for ( auto const& p : n.ports() )
  {
    for ( auto r : { p.rail1, p.rail0 } )
    {
      if ( !exists( r ) )
      {
        add( "dangling net", "port " + p.name + " uses net " + std::to_string( r ) );
        references_ok = false;
      }
    }
    if ( p.rail1 == p.rail0 )
      add( "port", "port " + p.name + " uses the same net for both rails" );
    if ( p.const_value && !p.is_input() )
      add( "port", "output port " + p.name + " carries a constant" );
  }
  if ( !references_ok )
    return report;

  for ( auto const& p : n.ports() )
  {
    if ( p.is_input() )
    {
      for ( auto r : { p.rail1, p.rail0 } )
      {
        ++drivers[r];
        port_driven[r] = true;
      }
    }
  }
  for ( auto const& g : n.gates() )
    ++drivers[g.output];
  for ( net_id id = 0; id < nets; ++id )
  {
    if ( drivers[id] > 1 )
      add( "multiple drivers", "net " + std::to_string( id ) + " has " + std::to_string( drivers[id] ) + " drivers" );
    else if ( drivers[id] == 0 )
      add( "undriven net", "net " + std::to_string( id ) + " has no driver" );
  }

  // combinational cycles: drop every C2 output edge and require a topological order
  auto const fanout = gate_fanouts( n );
  auto const gates = n.gates();
  std::vector<std::size_t> indegree( gates.size(), 0 );
  for ( auto const& g : gates )
  {
    if ( !is_combinational( g.kind ) )
      continue;
    for ( auto reader : fanout[g.output] )
      ++indegree[reader];
  }
  std::vector<gate_id> ready;
  for ( auto const& g : gates )
  {
    if ( indegree[g.id] == 0 )
      ready.push_back( g.id );
  }
  std::size_t visited = 0;
  while ( !ready.empty() )
  {
    auto const id = ready.back();
    ready.pop_back();
    ++visited;
    if ( !is_combinational( gates[id].kind ) )
      continue;
    for ( auto reader : fanout[gates[id].output] )
    {
      if ( --indegree[reader] == 0 )
        ready.push_back( reader );
    }
  }
  bool const acyclic = visited == gates.size();
  if ( !acyclic )
    add( "combinational cycle", std::to_string( gates.size() - visited ) + " gates sit on a loop without a C2" );

  // init consistency against the stored values of every net
  auto const level = environment_level.value_or( rest_level( n ) );
  std::vector<bool> value( nets, level );
  for ( auto const& g : gates )
    value[g.output] = g.init;
  for ( auto const& g : gates )
  {
    if ( g.inputs.size() != arity( g.kind ) )
      continue;
    bool const a = value[g.inputs[0]];
    bool const b = g.inputs.size() > 1 ? value[g.inputs[1]] : false;
    if ( evaluate( g.kind, a, b, g.init ) != g.init )
    {
      add( "init inconsistency", "gate " + std::to_string( g.id ) + " (" + std::string( to_string( g.kind ) ) +
                                     ") has init " + std::to_string( g.init ) + " but its inputs evaluate otherwise" );
    }
  }
  return report;
}

struct netlist_stats
{
  std::map<gate_kind, std::size_t> per_kind;
  std::size_t total{};
  double area_proxy{};

  std::size_t count( gate_kind kind ) const
  {
    auto it = per_kind.find( kind );
    return it == per_kind.end() ? 0 : it->second;
  }
};

/// Relative cell areas for the area proxy. Missing kinds weigh 1.0.
using area_weights = std::map<gate_kind, double>;

inline netlist_stats stats( netlist const& n, area_weights const& weights = {} )
{
  netlist_stats s;
  for ( auto kind : all_gate_kinds )
    s.per_kind[kind] = 0;
  for ( auto const& g : n.gates() )
    ++s.per_kind[g.kind];
  for ( auto const& [kind, count] : s.per_kind )
  {
    s.total += count;
    auto it = weights.find( kind );
    s.area_proxy += static_cast<double>( count ) * ( it == weights.end() ? 1.0 : it->second );
  }
  return s;
}

} // namespace qdi
