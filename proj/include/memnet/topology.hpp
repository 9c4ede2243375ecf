#pragma once

/*!
  \file topology.hpp
  \brief Layered tree wiring of memory cells
*/

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace memnet
{

/*! \brief Hardware limit on the number of inputs per cell. */
inline constexpr std::size_t max_fan_in = 6;

/*! \brief One layer of cells.

  The layer reads `n_sources` signals from the layer below (or the primary
  inputs). Lines `n_sources .. n_padded - 1` are constant-0 padding.
  `wiring[c]` lists the line indices feeding cell `c`; its size is the fan-in.
*/
struct layer_spec
{
  std::size_t n_sources = 0;
  std::size_t n_padded = 0;
  std::vector<std::vector<std::size_t>> wiring;

  std::size_t width() const { return wiring.size(); }

  friend bool operator==( layer_spec const&, layer_spec const& ) = default;
};

struct tree_topology
{
  std::size_t n_inputs = 0;
  std::size_t n_padded_inputs = 0;
  std::vector<layer_spec> layers;
  std::size_t n_outputs = 0;

  std::size_t num_cells() const
  {
    std::size_t n = 0;
    for ( auto const& l : layers )
    {
      n += l.width();
    }
    return n;
  }

  std::size_t num_connections() const
  {
    std::size_t n = 0;
    for ( auto const& l : layers )
    {
      for ( auto const& w : l.wiring )
      {
        n += w.size();
      }
    }
    return n;
  }

  /* one device per connection plus one reference device per cell */
  std::size_t num_devices() const { return num_connections() + num_cells(); }

  std::vector<std::size_t> widths() const
  {
    std::vector<std::size_t> w;
    for ( auto const& l : layers )
    {
      w.push_back( l.width() );
    }
    return w;
  }

  /*! \brief Index of the first device bit of each layer, plus the total. */
  std::vector<std::size_t> layer_bit_offsets() const
  {
    std::vector<std::size_t> off{ 0 };
    for ( auto const& l : layers )
    {
      std::size_t bits = 0;
      for ( auto const& w : l.wiring )
      {
        bits += w.size() + 1;
      }
      off.push_back( off.back() + bits );
    }
    return off;
  }

  /*! \brief Throws `std::invalid_argument` describing the first violated invariant. */
  void validate() const
  {
    auto fail = []( std::string const& msg ) { throw std::invalid_argument( "invalid topology: " + msg ); };
    if ( n_inputs == 0 )
      fail( "no inputs" );
    if ( n_padded_inputs < n_inputs )
      fail( "padded input count below input count" );
    if ( layers.empty() )
      fail( "no layers" );
    if ( layers.back().width() != n_outputs || n_outputs == 0 )
      fail( "last layer width differs from output count" );

    std::size_t signals = n_inputs;
    for ( std::size_t li = 0; li < layers.size(); ++li )
    {
      auto const& l = layers[li];
      auto const where = " (layer " + std::to_string( li ) + ")";
      if ( l.n_sources != signals )
        fail( "source count does not match previous layer" + where );
      if ( l.n_padded < l.n_sources )
        fail( "padded line count below source count" + where );
      if ( li == 0 && l.n_padded != n_padded_inputs )
        fail( "first layer padding differs from padded input count" );
      if ( l.wiring.empty() )
        fail( "empty layer" + where );

      std::vector<bool> used( l.n_sources, false );
      for ( auto const& w : l.wiring )
      {
        if ( w.empty() || w.size() > max_fan_in )
          fail( "fan-in outside 1.." + std::to_string( max_fan_in ) + where );
        for ( auto s : w )
        {
          if ( s >= l.n_padded )
            fail( "source index out of range" + where );
          if ( s < l.n_sources )
            used[s] = true;
        }
      }
      if ( std::find( used.begin(), used.end(), false ) != used.end() )
        fail( "a signal feeds no downstream cell" + where );
      signals = l.width();
    }
  }

  friend bool operator==( tree_topology const&, tree_topology const& ) = default;
};

namespace detail
{

inline std::size_t ceil_div( std::size_t a, std::size_t b ) { return ( a + b - 1 ) / b; }

} // namespace detail

/*! \brief Builds the reduction tree used throughout the sizing model.

  Reduction layers of `fan_in_max`-input cells are added while more than
  `fan_in_max * n_outputs` signals remain; each reduction layer pads its
  inputs with constant-0 lines up to a multiple of `fan_in_max`. A final
  layer of `n_outputs` cells then takes `ceil(signals / n_outputs)` inputs
  each, with signals assigned round-robin.
*/
inline tree_topology build_tree_topology( std::size_t n_inputs, std::size_t fan_in_max, std::size_t n_outputs )
{
  if ( n_inputs == 0 )
    throw std::invalid_argument( "build_tree_topology: need at least one input" );
  if ( fan_in_max == 0 || fan_in_max > max_fan_in )
    throw std::invalid_argument( "build_tree_topology: fan-in must be in 1..6" );
  if ( n_outputs == 0 )
    throw std::invalid_argument( "build_tree_topology: need at least one output" );
  // fan-in 1 layers never shrink the signal count
  if ( fan_in_max == 1 && n_inputs > n_outputs )
    throw std::invalid_argument( "build_tree_topology: fan-in 1 cannot reduce " + std::to_string( n_inputs ) +
                                 " inputs to " + std::to_string( n_outputs ) + " outputs" );

  tree_topology t;
  t.n_inputs = n_inputs;
  t.n_outputs = n_outputs;

  std::size_t signals = n_inputs;
  while ( signals > fan_in_max * n_outputs )
  {
    layer_spec l;
    l.n_sources = signals;
    auto const cells = detail::ceil_div( signals, fan_in_max );
    l.n_padded = cells * fan_in_max;
    l.wiring.resize( cells );
    for ( std::size_t c = 0; c < cells; ++c )
    {
      for ( std::size_t i = 0; i < fan_in_max; ++i )
      {
        l.wiring[c].push_back( c * fan_in_max + i );
      }
    }
    t.layers.push_back( std::move( l ) );
    signals = cells;
  }

  layer_spec last;
  last.n_sources = signals;
  last.n_padded = signals;
  auto const fan_in = detail::ceil_div( signals, n_outputs );
  assert( fan_in <= fan_in_max );
  last.wiring.resize( n_outputs );
  for ( std::size_t c = 0; c < n_outputs; ++c )
  {
    for ( std::size_t i = 0; i < fan_in; ++i )
    {
      last.wiring[c].push_back( ( c * fan_in + i ) % signals );
    }
  }
  t.layers.push_back( std::move( last ) );

  t.n_padded_inputs = t.layers.front().n_padded;
  return t;
}

} // namespace memnet
