#pragma once

/*!
  \file random.hpp
  \brief Seeded random streams with explicit key derivation

  Every stochastic step draws from a stream whose seed is a hash of the
  master seed and a tuple of indices (stage, generation, individual, ...).
  Results therefore do not depend on evaluation order or thread count.
*/

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace memnet
{

inline std::uint64_t splitmix64( std::uint64_t x )
{
  x += 0x9e3779b97f4a7c15ULL;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ULL;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebULL;
  return x ^ ( x >> 31 );
}

inline std::uint64_t derive_seed( std::uint64_t master, std::initializer_list<std::uint64_t> keys )
{
  std::uint64_t h = splitmix64( master );
  for ( auto k : keys )
  {
    h = splitmix64( h ^ splitmix64( k + 0x632be59bd9b4e019ULL ) );
  }
  return h;
}

/*! \brief 64-bit Mersenne Twister with platform-independent conversions. */
class random_stream
{
public:
  explicit random_stream( std::uint64_t seed ) : engine_( seed ) {}
  random_stream( std::uint64_t master, std::initializer_list<std::uint64_t> keys ) : engine_( derive_seed( master, keys ) ) {}

  std::uint64_t next() { return engine_(); }

  /* uniform in [0, 1) with 53 random bits */
  double uniform() { return static_cast<double>( engine_() >> 11 ) * 0x1.0p-53; }

  bool bernoulli( double p ) { return uniform() < p; }

  /* uniform integer in [0, n) */
  std::size_t below( std::size_t n )
  {
    // Lemire's multiply-shift with rejection
    __extension__ using u128 = unsigned __int128;
    std::uint64_t const bound = n;
    u128 m = static_cast<u128>( engine_() ) * bound;
    auto low = static_cast<std::uint64_t>( m );
    if ( low < bound )
    {
      std::uint64_t const threshold = -bound % bound;
      while ( low < threshold )
      {
        m = static_cast<u128>( engine_() ) * bound;
        low = static_cast<std::uint64_t>( m );
      }
    }
    return static_cast<std::size_t>( m >> 64 );
  }

private:
  std::mt19937_64 engine_;
};

} // namespace memnet
