#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memnet
{

/*! \brief Logic vector with one byte (0 or 1) per bit. */
using bit_vector = std::vector<std::uint8_t>;

inline std::size_t hamming_distance( bit_vector const& a, bit_vector const& b )
{
  if ( a.size() != b.size() )
  {
    throw std::invalid_argument( "hamming_distance: length mismatch" );
  }
  std::size_t d = 0;
  for ( std::size_t i = 0; i < a.size(); ++i )
  {
    d += ( a[i] != b[i] ) ? 1u : 0u;
  }
  return d;
}

inline std::string to_string( bit_vector const& bits )
{
  std::string s;
  s.reserve( bits.size() );
  for ( auto b : bits )
  {
    s.push_back( b ? '1' : '0' );
  }
  return s;
}

/* returns false on any character other than '0' or '1' */
inline bool parse_bits( std::string_view s, bit_vector& out )
{
  out.clear();
  out.reserve( s.size() );
  for ( char c : s )
  {
    if ( c != '0' && c != '1' )
    {
      return false;
    }
    out.push_back( c == '1' ? 1 : 0 );
  }
  return true;
}

inline bit_vector complement( bit_vector bits )
{
  for ( auto& b : bits )
  {
    b ^= 1u;
  }
  return bits;
}

} // namespace memnet
