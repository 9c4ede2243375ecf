#pragma once

/*!
  \file sizing.hpp
  \brief Hardware sizing and capacity arithmetic

  All quantities are exact integers. The canonical family is the fan-in 6,
  12-output reduction tree; its input counts are `36 * 6^(L-1)` for `L`
  layers, with `(N + 24) / 5` inverters and `(7N - 12) / 5` memory bits.
*/

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "topology.hpp"

namespace memnet
{

/*! \brief Exact fraction, always in lowest terms for the values produced here. */
struct rational
{
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  friend bool operator==( rational const&, rational const& ) = default;
};

inline std::string to_string( rational const& r ) { return std::to_string( r.num ) + "/" + std::to_string( r.den ); }

inline constexpr std::uint64_t canonical_fan_in = 6;
inline constexpr std::uint64_t canonical_outputs = 12;

struct sizing_report
{
  std::uint64_t n_inputs = 0;
  std::uint64_t n_layers = 0;
  std::uint64_t inverters = 0;
  std::uint64_t memory_bits = 0;
  rational resolution;

  friend bool operator==( sizing_report const&, sizing_report const& ) = default;
};

enum class capacity_mode
{
  paper_ratio,
  canonical
};

struct capacity_report
{
  std::uint64_t memory_bits = 0;
  capacity_mode mode = capacity_mode::paper_ratio;
  std::uint64_t max_inputs = 0;
  std::uint64_t layers = 0;
  rational resolution;
};

/* one inverter per cell */
inline std::uint64_t count_inverters( tree_topology const& t ) { return t.num_cells(); }

/* one bit per input device plus one per reference device */
inline std::uint64_t count_memory_bits( tree_topology const& t ) { return t.num_devices(); }

inline rational input_resolution( std::uint64_t n_inputs )
{
  if ( n_inputs == 0 )
    throw std::invalid_argument( "input_resolution: zero inputs" );
  return { 1, n_inputs };
}

/*! \brief Input count of the canonical tree with `layers` layers, `36 * 6^(layers-1)`. */
inline std::uint64_t canonical_inputs( std::uint64_t layers )
{
  if ( layers == 0 )
    throw std::invalid_argument( "canonical_inputs: zero layers" );
  std::uint64_t n = canonical_fan_in * canonical_outputs / 2;
  for ( std::uint64_t l = 1; l < layers; ++l )
  {
    if ( n > std::numeric_limits<std::uint64_t>::max() / canonical_fan_in )
      throw std::overflow_error( "canonical_inputs: too many layers" );
    n *= canonical_fan_in;
  }
  return n;
}

/* exact bit cost of a canonical network, (7N - 12) / 5 */
inline std::uint64_t canonical_memory_bits( std::uint64_t layers ) { return ( 7 * canonical_inputs( layers ) - 12 ) / 5; }

/*! \brief Layer count of the fan-in 6, 12-output tree for `n_inputs` inputs. */
inline std::uint64_t layers_required( std::uint64_t n_inputs )
{
  if ( n_inputs == 0 )
    throw std::invalid_argument( "layers_required: zero inputs" );
  if ( n_inputs <= canonical_fan_in * canonical_outputs )
    return 1;
  std::uint64_t layers = 1;
  std::uint64_t cap = canonical_inputs( 1 );
  while ( cap < n_inputs )
  {
    cap *= canonical_fan_in;
    ++layers;
  }
  return layers;
}

inline sizing_report size_network( tree_topology const& t )
{
  return { t.n_inputs, t.layers.size(), count_inverters( t ), count_memory_bits( t ), input_resolution( t.n_inputs ) };
}

inline sizing_report size_network( std::uint64_t n_inputs, std::uint64_t fan_in_max, std::uint64_t n_outputs )
{
  return size_network( build_tree_topology( n_inputs, fan_in_max, n_outputs ) );
}

/*! \brief Largest input count a memory budget supports.

  `paper_ratio` charges the asymptotic 7/5 bits per input of the canonical
  family, `floor(5 * bits / 7)`. `canonical` returns the largest canonical
  input count whose exact bit cost fits; it needs at least the 48 bits of
  the one-layer network.
*/
inline capacity_report extrapolate_capacity( std::uint64_t memory_bits, capacity_mode mode )
{
  if ( memory_bits < max_fan_in + 1 )
    throw std::invalid_argument( "extrapolate_capacity: fewer bits than one cell needs" );
  if ( memory_bits > std::numeric_limits<std::uint64_t>::max() / 64 )
    throw std::overflow_error( "extrapolate_capacity: memory size too large" );

  capacity_report r;
  r.memory_bits = memory_bits;
  r.mode = mode;
  if ( mode == capacity_mode::paper_ratio )
  {
    r.max_inputs = 5 * memory_bits / 7;
  }
  else
  {
    if ( canonical_memory_bits( 1 ) > memory_bits )
      throw std::invalid_argument( "extrapolate_capacity: no canonical network fits in " + std::to_string( memory_bits ) +
                                   " bits (minimum " + std::to_string( canonical_memory_bits( 1 ) ) + ")" );
    // (7N - 12) / 5 <= bits  <=>  7N <= 5 bits + 12
    std::uint64_t const budget = 5 * memory_bits + 12;
    std::uint64_t n = canonical_inputs( 1 );
    while ( 7 * ( n * canonical_fan_in ) <= budget )
      n *= canonical_fan_in;
    r.max_inputs = n;
  }
  r.layers = layers_required( r.max_inputs );
  r.resolution = input_resolution( r.max_inputs );
  return r;
}

} // namespace memnet
