#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <memnet/bits.hpp>
#include <memnet/parallel.hpp>
#include <memnet/random.hpp>

using namespace memnet;

TEST( random, streams_are_reproducible )
{
  random_stream a( 42, { 1, 2, 3 } ), b( 42, { 1, 2, 3 } );
  for ( int i = 0; i < 1000; ++i )
    ASSERT_EQ( a.next(), b.next() );
}

TEST( random, keys_select_distinct_streams )
{
  std::set<std::uint64_t> firsts;
  for ( std::uint64_t k = 0; k < 1000; ++k )
    firsts.insert( random_stream( 7, { k } ).next() );
  EXPECT_EQ( firsts.size(), 1000u );
  EXPECT_NE( derive_seed( 1, { 2, 3 } ), derive_seed( 1, { 3, 2 } ) );
  EXPECT_NE( derive_seed( 1, { 0 } ), derive_seed( 1, { 0, 0 } ) );
}

TEST( random, uniform_and_below_ranges )
{
  random_stream r( 5 );
  std::vector<std::size_t> counts( 7, 0 );
  double sum = 0;
  for ( int i = 0; i < 70000; ++i )
  {
    double const u = r.uniform();
    ASSERT_GE( u, 0.0 );
    ASSERT_LT( u, 1.0 );
    sum += u;
    auto const k = r.below( 7 );
    ASSERT_LT( k, 7u );
    ++counts[k];
  }
  EXPECT_NEAR( sum / 70000, 0.5, 0.01 );
  for ( auto c : counts )
    EXPECT_NEAR( static_cast<double>( c ), 10000.0, 500.0 );
}

TEST( random, bernoulli_edges )
{
  random_stream r( 9 );
  for ( int i = 0; i < 1000; ++i )
  {
    EXPECT_FALSE( r.bernoulli( 0.0 ) );
    EXPECT_TRUE( r.bernoulli( 1.0 ) );
  }
}

TEST( parallel_for, visits_every_index_once )
{
  for ( std::size_t threads : { 0, 1, 2, 3, 8 } )
  {
    std::vector<std::atomic<int>> hits( 101 );
    parallel_for( hits.size(), threads, [&]( std::size_t i ) { ++hits[i]; } );
    for ( auto const& h : hits )
      EXPECT_EQ( h.load(), 1 );
  }
}

TEST( parallel_for, propagates_exceptions )
{
  EXPECT_THROW( parallel_for( 10, 3, []( std::size_t i ) {
                  if ( i == 7 )
                    throw std::runtime_error( "boom" );
                } ),
                std::runtime_error );
}

TEST( bits, helpers )
{
  bit_vector b;
  EXPECT_TRUE( parse_bits( "0110", b ) );
  EXPECT_EQ( b, ( bit_vector{ 0, 1, 1, 0 } ) );
  EXPECT_EQ( to_string( b ), "0110" );
  EXPECT_EQ( complement( b ), ( bit_vector{ 1, 0, 0, 1 } ) );
  EXPECT_EQ( hamming_distance( b, complement( b ) ), 4u );
  EXPECT_FALSE( parse_bits( "01X1", b ) );
}
