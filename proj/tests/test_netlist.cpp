#include "oracles.hpp"

#include <qdi/components.hpp>
#include <qdi/multiplier.hpp>
#include <qdi/netlist_io.hpp>

#include <gtest/gtest.h>

using namespace qdi;

namespace
{

netlist two_input_c2()
{
  netlist_builder b( "c2" );
  auto const a = b.add_net();
  auto const c = b.add_net();
  b.add_gate( gate_kind::c2, { a, c }, false );
  return std::move( b ).build();
}

} // namespace

TEST( NetlistBuilder, AddGateAllocatesFreshOutput )
{
  netlist_builder b( "t" );
  auto const n1 = b.add_net();
  auto const n2 = b.add_net();
  auto const n3 = b.add_gate( gate_kind::c2, { n1, n2 }, false );
  EXPECT_EQ( n3, 2u );
  auto const n = std::move( b ).build();
  ASSERT_EQ( n.gates().size(), 1u );
  EXPECT_EQ( n.gates()[0].kind, gate_kind::c2 );
  EXPECT_EQ( n.gates()[0].output, n3 );
  EXPECT_EQ( n.net_count(), 3u );
}

TEST( NetlistBuilder, RejectsArityMismatchAndUnknownNets )
{
  netlist_builder b( "t" );
  auto const n1 = b.add_net();
  auto const n2 = b.add_net();
  EXPECT_THROW( b.add_gate( gate_kind::inv, { n1, n2 }, false ), netlist_error );
  EXPECT_THROW( b.add_gate( gate_kind::and2, { n1 }, false ), netlist_error );
  EXPECT_THROW( b.add_gate( gate_kind::or2, { n1, 42 }, false ), netlist_error );
  EXPECT_EQ( b.gate_count(), 0u );
}

TEST( Validate, ManualDoubleDriverIsReported )
{
  netlist_builder b( "t" );
  auto const a = b.add_input( "A" );
  auto const out = b.add_gate( gate_kind::or2, { a.rail1, a.rail0 }, false );
  b.add_gate_driving( gate_kind::and2, { a.rail1, a.rail0 }, out, false );
  auto const r = validate( std::move( b ).build() );
  EXPECT_TRUE( r.has( "multiple drivers" ) );
}

TEST( Validate, StrongAndIsClean )
{
  EXPECT_TRUE( validate( strong_and2( protocol::rtz ) ).ok() );
  EXPECT_TRUE( validate( strong_and2( protocol::rto ) ).ok() );
}

TEST( Validate, CombinationalLoopIsReported )
{
  netlist_builder b( "loop" );
  auto const a = b.add_net();
  auto const bnet = b.add_net();
  b.add_gate_driving( gate_kind::or2, { a, bnet }, a, false );
  auto const r = validate( std::move( b ).build() );
  EXPECT_TRUE( r.has( "combinational cycle" ) );
}

TEST( Validate, LoopThroughCElementIsAllowed )
{
  netlist_builder b( "keeper" );
  auto const x = b.add_input( "X" ).rail1;
  auto const fb = b.add_net();
  auto const c = b.add_gate( gate_kind::c2, { x, fb }, false );
  b.add_gate_driving( gate_kind::or2, { c, x }, fb, false );
  auto const r = validate( std::move( b ).build() );
  EXPECT_FALSE( r.has( "combinational cycle" ) );
  EXPECT_TRUE( r.ok() );
}

TEST( Validate, InitInconsistency )
{
  netlist_builder b( "t" );
  auto const a = b.add_input( "A" );
  b.add_gate( gate_kind::and2, { a.rail1, a.rail0 }, true );
  auto const r = validate( std::move( b ).build() );
  EXPECT_TRUE( r.has( "init inconsistency" ) );
}

TEST( Validate, PortRailsMustDiffer )
{
  netlist_builder b( "t" );
  auto const n = b.add_net();
  b.add_port( { "P", port_direction::input, n, n, std::nullopt } );
  EXPECT_TRUE( validate( std::move( b ).build() ).has( "port" ) );
}

TEST( Validate, UndrivenNet )
{
  netlist_builder b( "t" );
  auto const a = b.add_input( "A" );
  auto const floating = b.add_net();
  b.add_gate( gate_kind::or2, { a.rail1, floating }, false );
  EXPECT_TRUE( validate( std::move( b ).build() ).has( "undriven net" ) );
}

TEST( ReduceTree, EightLeavesMakeSevenGatesDepthThree )
{
  netlist_builder b( "t" );
  std::vector<net_id> leaves;
  for ( int i = 0; i < 8; ++i )
    leaves.push_back( b.add_net() );
  b.reduce_tree( gate_kind::c2, leaves, false );
  EXPECT_EQ( b.gate_count(), 7u );
  EXPECT_EQ( tree_depth( 8 ), 3u );
}

TEST( ReduceTree, SingleNetIsIdentity )
{
  netlist_builder b( "t" );
  auto const a = b.add_net();
  std::vector<net_id> one{ a };
  EXPECT_EQ( b.reduce_tree( gate_kind::or2, one, false ), a );
  EXPECT_EQ( b.gate_count(), 0u );
}

TEST( ReduceTree, ThreeNetsNestLeftPair )
{
  netlist_builder b( "t" );
  std::vector<net_id> v{ b.add_net(), b.add_net(), b.add_net() };
  auto const root = b.reduce_tree( gate_kind::c2, v, false );
  auto const n = std::move( b ).build();
  ASSERT_EQ( n.gates().size(), 2u );
  auto const& inner = n.gates()[0];
  auto const& outer = n.gates()[1];
  EXPECT_EQ( inner.inputs, ( std::vector<net_id>{ v[0], v[1] } ) );
  EXPECT_EQ( outer.inputs, ( std::vector<net_id>{ inner.output, v[2] } ) );
  EXPECT_EQ( outer.output, root );
}

TEST( ReduceTree, Errors )
{
  netlist_builder b( "t" );
  std::vector<net_id> none;
  EXPECT_THROW( b.reduce_tree( gate_kind::c2, none, false ), netlist_error );
  std::vector<net_id> two{ b.add_net(), b.add_net() };
  EXPECT_THROW( b.reduce_tree( gate_kind::inv, two, false ), netlist_error );
}

TEST( ReduceTree, PropertyGateCountAndDepth )
{
  for ( std::size_t k = 1; k <= 40; ++k )
  {
    netlist_builder b( "t" );
    std::vector<net_id> leaves;
    for ( std::size_t i = 0; i < k; ++i )
      leaves.push_back( b.add_net() );
    auto const root = b.reduce_tree( gate_kind::or2, leaves, false );
    auto const n = std::move( b ).build();
    EXPECT_EQ( n.gates().size(), k - 1 ) << k;
    // longest leaf-to-root path
    std::vector<std::size_t> depth( n.net_count(), 0 );
    for ( auto const& g : n.gates() )
      depth[g.output] = 1 + std::max( depth[g.inputs[0]], depth[g.inputs[1]] );
    EXPECT_EQ( depth[root], static_cast<std::size_t>( std::ceil( std::log2( double( k ) ) ) ) ) << k;
    EXPECT_EQ( tree_depth( k ), depth[root] );
  }
}

TEST( Stats, EmptyNetlist )
{
  auto const s = stats( netlist_builder( "empty" ).build() );
  EXPECT_EQ( s.total, 0u );
  for ( auto kind : all_gate_kinds )
    EXPECT_EQ( s.count( kind ), 0u );
  EXPECT_EQ( s.area_proxy, 0.0 );
}

TEST( Stats, MultiplierMetadataAndProtocolSwap )
{
  auto const rtz = array_multiplier( { 4, protocol::rtz, fa_variant::dims } );
  auto const rto = array_multiplier( { 4, protocol::rto, fa_variant::dims } );
  EXPECT_EQ( rtz.label( "and_blocks" ), "16" );
  EXPECT_EQ( rtz.label( "fa_blocks" ), "12" );
  auto const a = stats( rtz );
  auto const b = stats( rto );
  EXPECT_EQ( a.total, b.total );
  EXPECT_EQ( a.count( gate_kind::or2 ), b.count( gate_kind::and2 ) );
  EXPECT_EQ( a.count( gate_kind::and2 ), b.count( gate_kind::or2 ) );
  EXPECT_EQ( a.count( gate_kind::c2 ), b.count( gate_kind::c2 ) );
}

TEST( Stats, AreaWeights )
{
  auto const n = strong_and2( protocol::rtz );
  EXPECT_DOUBLE_EQ( stats( n ).area_proxy, 6.0 );
  auto const s = stats( n, { { gate_kind::c2, 2.5 }, { gate_kind::or2, 1.25 } } );
  EXPECT_DOUBLE_EQ( s.area_proxy, 4 * 2.5 + 2 * 1.25 );
}

TEST( Serialize, StrongAndRoundTrip )
{
  auto const n = strong_and2( protocol::rto );
  EXPECT_EQ( deserialize( serialize( n ) ), n );
}

TEST( Serialize, MultiplierRoundTripKeepsConstants )
{
  auto const n = array_multiplier( { 3, protocol::rtz, fa_variant::weak } );
  auto const back = deserialize( serialize( n ) );
  EXPECT_EQ( back, n );
  EXPECT_EQ( back.constant_ports().size(), 3u );
}

TEST( Serialize, UnknownKind )
{
  auto doc = to_json( two_input_c2() );
  doc["gates"][0]["kind"] = "XOR9";
  EXPECT_THROW( from_json( doc ), format_error );
}

TEST( Serialize, DanglingReference )
{
  netlist_builder b( "t" );
  for ( int i = 0; i < 9; ++i )
    b.add_net();
  b.add_gate( gate_kind::or2, { 0, 1 }, false );
  auto doc = to_json( std::move( b ).build() );
  doc["gates"][0]["inputs"][1] = 999;
  try
  {
    from_json( doc );
    FAIL() << "expected a format error";
  }
  catch ( format_error const& e )
  {
    EXPECT_NE( std::string( e.what() ).find( "999" ), std::string::npos );
  }
}

TEST( Serialize, MalformedDocuments )
{
  EXPECT_THROW( deserialize( "{not json" ), format_error );
  EXPECT_THROW( deserialize( "[]" ), format_error );
  EXPECT_THROW( deserialize( R"({"name":"x","net_count":2,"gates":[{"id":0,"kind":"INV","inputs":[0,1],"output":1,"init":0}],"ports":[]})" ),
                format_error );
  EXPECT_THROW( deserialize( R"({"name":"x","net_count":3,"gates":[{"id":1,"kind":"INV","inputs":[0],"output":1,"init":0}],"ports":[]})" ),
                format_error );
}

TEST( Serialize, RoundTripPropertyOverRandomNetlists )
{
  std::mt19937_64 rng( 20240611 );
  for ( int trial = 0; trial < 300; ++trial )
  {
    auto const n = oracle::random_netlist( rng, trial % 2 == 1 );
    auto const text = serialize( n );
    auto const back = deserialize( text );
    ASSERT_EQ( back, n ) << "trial " << trial;
    ASSERT_EQ( serialize( back ), text );
  }
}

TEST( Dot, SingleGate )
{
  netlist_builder b( "c" );
  auto const a = b.add_input( "A" );
  b.add_gate( gate_kind::c2, { a.rail1, a.rail0 }, false );
  auto const n = std::move( b ).build();
  auto const dot = to_dot( n );
  EXPECT_NE( dot.find( "g0 [shape=circle" ), std::string::npos );
  EXPECT_NE( dot.find( "p0 -> g0 [label=\"n0\"]" ), std::string::npos );
  EXPECT_NE( dot.find( "p0 -> g0 [label=\"n1\"]" ), std::string::npos );
  EXPECT_EQ( dot, to_dot( n ) );
}

TEST( Dot, NodeCountMatchesGatesPlusPorts )
{
  auto const n = array_multiplier( { 4, protocol::rtz, fa_variant::dims } );
  auto const dot = to_dot( n );
  std::size_t nodes = 0, edges = 0;
  std::istringstream in( dot );
  std::string line;
  while ( std::getline( in, line ) )
  {
    if ( line.find( "->" ) != std::string::npos )
      ++edges;
    else if ( line.find( "[shape=" ) != std::string::npos )
      ++nodes;
  }
  EXPECT_EQ( nodes, n.gates().size() + n.ports().size() );
  std::size_t consumers = 0;
  for ( auto const& g : n.gates() )
    consumers += g.inputs.size();
  EXPECT_EQ( edges, consumers + 2 * n.output_ports().size() );
  EXPECT_EQ( dot, to_dot( n ) );
}
