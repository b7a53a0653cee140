#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace qdi
{

/// 4-phase handshake discipline. RTZ rests at all-zeros between data, RTO at all-ones.
enum class protocol : unsigned char
{
  rtz,
  rto
};

constexpr bool spacer_level( protocol p )
{
  return p == protocol::rto;
}

constexpr std::string_view to_string( protocol p )
{
  return p == protocol::rtz ? "rtz" : "rto";
}

inline std::optional<protocol> parse_protocol( std::string_view name )
{
  if ( name == "rtz" || name == "RTZ" )
    return protocol::rtz;
  if ( name == "rto" || name == "RTO" )
    return protocol::rto;
  return std::nullopt;
}

struct rail_values
{
  bool rail1{};
  bool rail0{};

  friend bool operator==( rail_values const&, rail_values const& ) = default;
};

enum class codeword_kind : unsigned char
{
  data,
  spacer,
  illegal
};

/// Decoded state of one dual-rail pair. `value` is only meaningful for data.
struct codeword_state
{
  codeword_kind kind{ codeword_kind::spacer };
  bool value{};

  static constexpr codeword_state data( bool b ) { return { codeword_kind::data, b }; }
  static constexpr codeword_state spacer() { return { codeword_kind::spacer, false }; }
  static constexpr codeword_state illegal() { return { codeword_kind::illegal, false }; }

  constexpr bool is_data() const { return kind == codeword_kind::data; }
  constexpr bool is_spacer() const { return kind == codeword_kind::spacer; }
  constexpr bool is_illegal() const { return kind == codeword_kind::illegal; }

  friend constexpr bool operator==( codeword_state const& a, codeword_state const& b )
  {
    return a.kind == b.kind && ( a.kind != codeword_kind::data || a.value == b.value );
  }
};

inline std::string to_string( codeword_state s )
{
  switch ( s.kind )
  {
  case codeword_kind::data:
    return s.value ? "Data(1)" : "Data(0)";
  case codeword_kind::spacer:
    return "Spacer";
  case codeword_kind::illegal:
    return "Illegal";
  }
  return "?";
}

/// Aggregate over many pairs: every pair data, every pair spacer, or in between.
enum class bus_state : unsigned char
{
  data,
  spacer,
  incomplete,
  illegal
};

constexpr rail_values encode( protocol p, bool bit )
{
  // RTZ: the rail matching the bit goes high. RTO is the bitwise complement.
  rail_values const rtz{ bit, !bit };
  if ( p == protocol::rtz )
    return rtz;
  return { !rtz.rail1, !rtz.rail0 };
}

constexpr rail_values spacer_rails( protocol p )
{
  return { spacer_level( p ), spacer_level( p ) };
}

constexpr codeword_state decode( protocol p, bool rail1, bool rail0 )
{
  bool const s = spacer_level( p );
  if ( rail1 == s && rail0 == s )
    return codeword_state::spacer();
  if ( rail1 != s && rail0 != s )
    return codeword_state::illegal();
  return codeword_state::data( rail1 != s );
}

constexpr codeword_state decode( protocol p, rail_values v )
{
  return decode( p, v.rail1, v.rail0 );
}

} // namespace qdi
