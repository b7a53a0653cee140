#include "oracles.hpp"

#include <qdi/analysis.hpp>
#include <qdi/multiplier.hpp>

#include <gtest/gtest.h>

using namespace qdi;

namespace
{

std::vector<bool> operands( unsigned n, std::uint64_t a, std::uint64_t b )
{
  auto v = unpack_bits( a, n );
  auto const hi = unpack_bits( b, n );
  v.insert( v.end(), hi.begin(), hi.end() );
  return v;
}

std::size_t fa_gates( fa_variant v )
{
  return stats( full_adder( v, protocol::rtz ) ).total;
}

} // namespace

TEST( Multiplier, BlockCountsForSeveralWidths )
{
  for ( unsigned n = 2; n <= 5; ++n )
  {
    for ( auto v : { fa_variant::dims, fa_variant::weak } )
    {
      auto const m = array_multiplier( { n, protocol::rtz, v } );
      EXPECT_EQ( m.label( "and_blocks" ), std::to_string( n * n ) );
      EXPECT_EQ( m.label( "fa_blocks" ), std::to_string( n * ( n - 1 ) ) );
      EXPECT_EQ( m.label( "const_carries" ), std::to_string( n ) );
      EXPECT_EQ( m.constant_ports().size(), n );
      EXPECT_EQ( m.input_ports().size(), 2 * n );
      EXPECT_EQ( m.output_ports().size(), 2 * n );
      // the labels agree with the gates actually emitted
      EXPECT_EQ( stats( m ).total, 6 * n * n + fa_gates( v ) * n * ( n - 1 ) );
      EXPECT_TRUE( validate( m ).ok() );
    }
  }
}

TEST( Multiplier, PortNamesAndMetadata )
{
  auto const m = array_multiplier( { 4, protocol::rto, fa_variant::dims } );
  for ( unsigned k = 0; k < 4; ++k )
  {
    EXPECT_TRUE( m.find_port( "A" + std::to_string( k ) ) );
    EXPECT_TRUE( m.find_port( "B" + std::to_string( k ) ) );
  }
  for ( unsigned k = 0; k < 8; ++k )
    EXPECT_TRUE( m.find_port( "P" + std::to_string( k ) ) );
  for ( auto name : { "K1_0", "K1_3", "K2_0", "K3_0" } )
  {
    auto const i = m.find_port( name );
    ASSERT_TRUE( i ) << name;
    EXPECT_EQ( m.ports()[*i].const_value, false );
  }
  EXPECT_EQ( m.label( "design" ), "array-mult" );
  EXPECT_EQ( m.label( "n" ), "4" );
  EXPECT_EQ( m.label( "protocol" ), "rto" );
  EXPECT_EQ( m.label( "fa_variant" ), "dims_fa" );
  EXPECT_EQ( m, array_multiplier( { 4, protocol::rto, fa_variant::dims } ) );
}

TEST( Multiplier, RejectsNarrowOperands )
{
  EXPECT_THROW( array_multiplier( { 1, protocol::rtz, fa_variant::weak } ), std::invalid_argument );
  EXPECT_THROW( array_multiplier( { 0, protocol::rtz, fa_variant::weak } ), std::invalid_argument );
}

TEST( Multiplier, SpotProducts )
{
  auto const env4 = make_environment( array_multiplier( { 4, protocol::rtz, fa_variant::dims } ), protocol::rtz );
  auto s4 = initialize( env4 );
  EXPECT_EQ( pack_bits( run_transaction( s4, env4, operands( 4, 15, 15 ) ).outputs ), 225u );
  auto const env2 = make_environment( array_multiplier( { 2, protocol::rto, fa_variant::weak } ), protocol::rto );
  auto s2 = initialize( env2 );
  EXPECT_EQ( pack_bits( run_transaction( s2, env2, operands( 2, 3, 3 ) ).outputs ), 9u );
}

TEST( Multiplier, P0NeedsOnlyLowBits )
{
  // P0 = A0 AND B0 completes without the other operand bits
  auto const m = array_multiplier( { 3, protocol::rtz, fa_variant::dims } );
  auto s = initialize( m, protocol::rtz );
  std::vector<assignment> as;
  for ( auto name : { "A0", "B0" } )
  {
    auto const& p = m.ports()[*m.find_port( name )];
    as.push_back( { p.rail1, true } );
  }
  s.apply_and_settle( as );
  auto const& p0 = m.ports()[*m.find_port( "P0" )];
  EXPECT_TRUE( s.value( p0.rail1 ) );
  auto const& p1 = m.ports()[*m.find_port( "P1" )];
  EXPECT_FALSE( s.value( p1.rail1 ) || s.value( p1.rail0 ) );
}

TEST( ReferenceProduct, ExamplesAndRange )
{
  EXPECT_EQ( reference_product( 4, 0, 13 ), 0u );
  EXPECT_EQ( reference_product( 4, 3, 5 ), 15u );
  EXPECT_EQ( reference_product( 4, 15, 15 ), 225u );
  EXPECT_THROW( reference_product( 4, 16, 1 ), std::out_of_range );
  EXPECT_THROW( reference_product( 4, 1, 16 ), std::out_of_range );
  EXPECT_THROW( reference_product( 0, 0, 0 ), std::out_of_range );
  for ( std::uint64_t a = 0; a < 64; ++a )
    for ( std::uint64_t b = 0; b < 64; ++b )
      ASSERT_EQ( reference_product( 6, a, b ), oracle::shift_add_product( a, b ) );
}

TEST( Multiplier, ExhaustiveSmallWidthsUnderRandomDelays )
{
  std::mt19937_64 rng( 77 );
  for ( unsigned n = 2; n <= 3; ++n )
  {
    for ( auto p : { protocol::rtz, protocol::rto } )
    {
      for ( auto v : { fa_variant::dims, fa_variant::weak } )
      {
        auto const env = make_environment( array_multiplier( { n, p, v } ), p );
        auto s = initialize( env, random_uniform_delay{ 1, 16, rng() } );
        for ( std::uint64_t a = 0; a < ( 1u << n ); ++a )
        {
          for ( std::uint64_t b = 0; b < ( 1u << n ); ++b )
          {
            auto const r = run_transaction( s, env, operands( n, a, b ) );
            ASSERT_EQ( pack_bits( r.outputs ), oracle::shift_add_product( a, b ) ) << n << " " << a << "*" << b;
          }
        }
      }
    }
  }
}

TEST( Multiplier, FiveBitSampleAgainstOracle )
{
  std::mt19937_64 rng( 8 );
  auto const env = make_environment( array_multiplier( { 5, protocol::rto, fa_variant::weak } ), protocol::rto );
  auto s = initialize( env, random_uniform_delay{ 1, 16, 99 } );
  for ( int i = 0; i < 100; ++i )
  {
    auto const a = rng() & 31, b = rng() & 31;
    ASSERT_EQ( pack_bits( run_transaction( s, env, operands( 5, a, b ) ).outputs ), oracle::shift_add_product( a, b ) );
  }
}

TEST( Multiplier, ForwardEqualsReverseUnderUnitDelays )
{
  for ( unsigned n = 2; n <= 4; ++n )
  {
    for ( auto p : { protocol::rtz, protocol::rto } )
    {
      for ( auto v : { fa_variant::dims, fa_variant::weak } )
      {
        auto const lat = measure_latencies( array_multiplier( { n, p, v } ), p );
        EXPECT_EQ( lat.worst.forward_latency, lat.worst.reverse_latency ) << n;
        EXPECT_EQ( lat.worst.cycle_time, lat.worst.forward_latency + lat.worst.reverse_latency );
      }
    }
  }
}

TEST( Multiplier, UnitDelayLatencyMatchesTimedOracle )
{
  // worst forward latency over all 256 codewords, frozen from the independent
  // monotone timed evaluation
  for ( auto v : { fa_variant::dims, fa_variant::weak } )
  {
    auto const m = array_multiplier( { 4, protocol::rtz, v } );
    std::uint64_t worst = 0;
    for ( std::uint64_t code = 0; code < 256; ++code )
      worst = std::max( worst, oracle::run( m, true, unpack_bits( code, 8 ), oracle::unit_delays( m ) ).forward );
    EXPECT_EQ( measure_latencies( m, protocol::rtz ).worst.forward_latency, worst ) << to_string( v );
    EXPECT_EQ( worst, v == fa_variant::dims ? 31u : 29u );
  }
}
