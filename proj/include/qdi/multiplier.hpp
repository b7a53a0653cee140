#pragma once

#include "components.hpp"
#include "encoding.hpp"
#include "netlist.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdi
{

struct multiplier_spec
{
  unsigned n{ 4 };
  protocol proto{ protocol::rtz };
  fa_variant fa{ fa_variant::weak };
};

/// Unsigned array multiplier built from strongly indicating partial-product ANDs and
/// rows of ripple-carry full adders. Inputs A0..A{n-1}, B0..B{n-1} plus one tied
/// carry port K<i>_<j> per constant-carry adder; outputs P0..P{2n-1}.
///
/// pp(i,j) = A_j AND B_i has weight i+j. Row 1 adds pp(0,*) and pp(1,*); each later
/// row adds the previous row's sums and final carry to pp(i,*). The first adder of
/// every row and the last adder of row 1 take a constant 0 carry-in, which gives n
/// constant-carry adders in total.
inline netlist array_multiplier( multiplier_spec const& spec )
{
  auto const n = spec.n;
  if ( n < 2 )
    throw std::invalid_argument( "array_multiplier: operand width must be at least 2" );
  auto const p = spec.proto;
  netlist_builder b( "array_mult_" + std::to_string( n ) + "x" + std::to_string( n ) + "_" + std::string( to_string( spec.fa ) ) +
                     "_" + std::string( to_string( p ) ) );

  std::vector<dual_rail> a, bb;
  for ( unsigned j = 0; j < n; ++j )
    a.push_back( b.add_input( "A" + std::to_string( j ) ) );
  for ( unsigned i = 0; i < n; ++i )
    bb.push_back( b.add_input( "B" + std::to_string( i ) ) );

  std::size_t and_blocks = 0, fa_blocks = 0, const_carries = 0;
  std::vector<std::vector<dual_rail>> pp( n, std::vector<dual_rail>( n ) );
  for ( unsigned i = 0; i < n; ++i )
  {
    for ( unsigned j = 0; j < n; ++j )
    {
      pp[i][j] = build_strong_and2( b, p, a[j], bb[i] );
      ++and_blocks;
    }
  }

  auto tied_carry = [&]( unsigned row, unsigned col ) {
    ++const_carries;
    return b.add_input( "K" + std::to_string( row ) + "_" + std::to_string( col ), false );
  };
  auto adder = [&]( dual_rail x, dual_rail y, dual_rail cin ) {
    ++fa_blocks;
    return build_full_adder( b, spec.fa, p, x, y, cin );
  };

  std::vector<dual_rail> product( 2 * n );
  product[0] = pp[0][0];
  std::vector<dual_rail> sums( n ), carries( n );
  for ( unsigned i = 1; i < n; ++i )
  {
    std::vector<dual_rail> row_sum( n ), row_carry( n );
    for ( unsigned j = 0; j < n; ++j )
    {
      adder_outputs out;
      if ( i == 1 )
      {
        if ( j == 0 )
          out = adder( pp[0][1], pp[1][0], tied_carry( i, j ) );
        else if ( j < n - 1 )
          out = adder( pp[0][j + 1], pp[1][j], row_carry[j - 1] );
        else
          out = adder( pp[1][n - 1], row_carry[n - 2], tied_carry( i, j ) );
      }
      else
      {
        if ( j == 0 )
          out = adder( sums[1], pp[i][0], tied_carry( i, j ) );
        else if ( j < n - 1 )
          out = adder( sums[j + 1], pp[i][j], row_carry[j - 1] );
        else
          out = adder( carries[n - 1], pp[i][n - 1], row_carry[n - 2] );
      }
      row_sum[j] = out.sum;
      row_carry[j] = out.carry;
    }
    product[i] = row_sum[0];
    sums = std::move( row_sum );
    carries = std::move( row_carry );
  }
  for ( unsigned k = 1; k < n; ++k )
    product[n - 1 + k] = sums[k];
  product[2 * n - 1] = carries[n - 1];

  for ( unsigned k = 0; k < 2 * n; ++k )
    b.add_output( "P" + std::to_string( k ), product[k] );

  b.set_label( "design", "array-mult" );
  b.set_label( "n", std::to_string( n ) );
  b.set_label( "protocol", std::string( to_string( p ) ) );
  b.set_label( "fa_variant", std::string( to_string( spec.fa ) ) );
  b.set_label( "and_blocks", std::to_string( and_blocks ) );
  b.set_label( "fa_blocks", std::to_string( fa_blocks ) );
  b.set_label( "const_carries", std::to_string( const_carries ) );
  return std::move( b ).build();
}

inline std::uint64_t reference_product( unsigned n, std::uint64_t a, std::uint64_t b )
{
  if ( n < 1 || n > 32 )
    throw std::out_of_range( "reference_product: width must be in [1, 32]" );
  auto const limit = std::uint64_t{ 1 } << n;
  if ( a >= limit || b >= limit )
    throw std::out_of_range( "reference_product: operand exceeds " + std::to_string( n ) + " bits" );
  return a * b;
}

/// Oracle over the multiplier's input order (A bits then B bits, LSB first).
inline oracle_fn multiplier_oracle( unsigned n )
{
  return [n]( std::vector<bool> const& in ) {
    std::uint64_t a = 0, b = 0;
    for ( unsigned k = 0; k < n; ++k )
    {
      a |= std::uint64_t( in.at( k ) ) << k;
      b |= std::uint64_t( in.at( n + k ) ) << k;
    }
    return unpack_bits( reference_product( n, a, b ), 2 * n );
  };
}

} // namespace qdi
