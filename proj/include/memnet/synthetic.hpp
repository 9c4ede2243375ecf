#pragma once

/*!
  \file synthetic.hpp
  \brief Seeded desk-scale pattern tasks
*/

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "network.hpp"
#include "random.hpp"

namespace memnet
{

/*! \brief Every input pattern of width `n_inputs` labeled by `fn`. */
inline dataset truth_table_task( std::size_t n_inputs, std::function<bit_vector( bit_vector const& )> const& fn )
{
  if ( n_inputs == 0 || n_inputs > 16 )
    throw std::invalid_argument( "truth_table_task: width must be in 1..16" );
  dataset d;
  for ( std::uint64_t v = 0; v < ( std::uint64_t{ 1 } << n_inputs ); ++v )
  {
    bit_vector x( n_inputs );
    for ( std::size_t i = 0; i < n_inputs; ++i )
      x[i] = static_cast<std::uint8_t>( ( v >> i ) & 1u );
    d.targets.push_back( fn( x ) );
    d.inputs.push_back( std::move( x ) );
  }
  return d;
}

struct planted_task
{
  dataset data;
  memory_network teacher;
};

namespace detail
{

/* true when no rail input pattern puts the cell within an epsilon perturbation of vth */
inline bool cell_is_robust( std::vector<device_state> const& inputs, device_state reference, circuit_params const& p,
                            double epsilon )
{
  double const up = ( 1.0 + epsilon ) / ( 1.0 - epsilon );
  double const down = ( 1.0 - epsilon ) / ( 1.0 + epsilon );
  std::vector<double> v( inputs.size() );
  for ( std::uint64_t pattern = 0; pattern < ( std::uint64_t{ 1 } << inputs.size() ); ++pattern )
  {
    for ( std::size_t i = 0; i < inputs.size(); ++i )
      v[i] = ( ( pattern >> i ) & 1u ) ? p.vdd : 0.0;
    double const node = node_voltage( v, inputs, reference, p );
    if ( !( node * up < p.vth || node * down > p.vth ) )
      return false;
  }
  return true;
}

} // namespace detail

/*! \brief Random inputs labeled by a random teacher network of the given topology.

  Each teacher cell is redrawn until no rail input pattern brings its node
  within a `teacher_epsilon` conductance spread of `vth`, so the labels have a
  robust realization. Whole teachers are redrawn until every output bit is 1
  on between 30% and 70% of the samples.
*/
inline planted_task make_planted_task( tree_topology const& topology, std::size_t n_samples, std::uint64_t seed,
                                       circuit_params const& params = {}, double teacher_epsilon = 0.1 )
{
  if ( n_samples == 0 )
    throw std::invalid_argument( "make_planted_task: need at least one sample" );
  if ( !( teacher_epsilon >= 0.0 && teacher_epsilon < 1.0 ) )
    throw std::invalid_argument( "make_planted_task: teacher epsilon must lie in [0, 1)" );
  random_stream rng( seed, { 0x7a5cULL } );
  planted_task t;
  for ( std::size_t s = 0; s < n_samples; ++s )
  {
    bit_vector x( topology.n_inputs );
    for ( auto& b : x )
      b = rng.bernoulli( 0.5 ) ? 1 : 0;
    t.data.inputs.push_back( std::move( x ) );
  }
  auto const draw = [&] { return rng.bernoulli( 0.5 ) ? device_state::on : device_state::off; };
  for ( std::size_t attempt = 0; attempt < 10000; ++attempt )
  {
    memory_network teacher( topology, params );
    for ( std::size_t k = 0; k < teacher.num_cells(); ++k )
    {
      std::vector<device_state> in( teacher.cells()[k].fan_in() );
      device_state ref;
      std::size_t tries = 0;
      do
      {
        if ( ++tries > 100000 )
          throw std::runtime_error( "make_planted_task: no robust cell configuration found" );
        for ( auto& d : in )
          d = draw();
        ref = draw();
      } while ( !detail::cell_is_robust( in, ref, params, teacher_epsilon ) );
      for ( std::size_t i = 0; i < in.size(); ++i )
        teacher.set_input_device( k, i, in[i] );
      teacher.set_reference_device( k, ref );
    }

    std::vector<bit_vector> targets;
    std::vector<std::size_t> ones( topology.n_outputs, 0 );
    for ( auto const& x : t.data.inputs )
    {
      targets.push_back( network_forward( teacher, x, eval_mode::digital ) );
      for ( std::size_t o = 0; o < topology.n_outputs; ++o )
        ones[o] += targets.back()[o];
    }
    bool balanced = true;
    for ( auto n : ones )
    {
      double const f = static_cast<double>( n ) / static_cast<double>( n_samples );
      balanced = balanced && f >= 0.3 && f <= 0.7;
    }
    if ( balanced )
    {
      t.data.targets = std::move( targets );
      t.teacher = std::move( teacher );
      return t;
    }
  }
  throw std::runtime_error( "make_planted_task: no balanced teacher found" );
}

/*! \brief Rail pair encoding: feature `i` becomes inputs `2i` (the bit) and `2i+1` (its complement). */
inline bit_vector dual_rail( bit_vector const& features )
{
  bit_vector x;
  x.reserve( 2 * features.size() );
  for ( auto b : features )
  {
    x.push_back( b );
    x.push_back( b ^ 1u );
  }
  return x;
}

/*! \brief Noisy copies of one random prototype per class.

  Prototypes are uniform random feature vectors, redrawn until every pair
  differs in at least a quarter of the features. Each sample flips every
  feature of its prototype independently with probability `noise`, and is
  then rail-pair encoded when `rails` is set (doubling the input width).
*/
inline dataset make_prototype_task( std::size_t n_classes, std::size_t n_features, std::size_t samples_per_class,
                                    double noise, std::uint64_t seed, bool rails = true )
{
  if ( n_classes == 0 || n_features == 0 || samples_per_class == 0 )
    throw std::invalid_argument( "make_prototype_task: invalid shape" );
  if ( !( noise >= 0.0 && noise < 0.5 ) )
    throw std::invalid_argument( "make_prototype_task: noise must lie in [0, 0.5)" );
  random_stream rng( seed, { 0x9a77ULL } );

  std::vector<bit_vector> prototypes;
  for ( std::size_t draws = 0; prototypes.size() < n_classes; ++draws )
  {
    if ( draws > 100000 )
      throw std::runtime_error( "make_prototype_task: prototypes too crowded" );
    bit_vector p( n_features );
    for ( auto& b : p )
      b = rng.bernoulli( 0.5 ) ? 1 : 0;
    bool ok = true;
    for ( auto const& q : prototypes )
      ok = ok && 4 * hamming_distance( p, q ) >= n_features;
    if ( ok )
      prototypes.push_back( std::move( p ) );
  }

  dataset d;
  for ( std::size_t c = 0; c < n_classes; ++c )
    d.class_names.push_back( "c" + std::to_string( c ) );
  for ( std::size_t s = 0; s < samples_per_class; ++s )
  {
    for ( std::size_t c = 0; c < n_classes; ++c )
    {
      bit_vector x = prototypes[c];
      for ( auto& b : x )
      {
        if ( rng.bernoulli( noise ) )
          b ^= 1u;
      }
      d.inputs.push_back( rails ? dual_rail( x ) : std::move( x ) );
      d.classes.push_back( c );
    }
  }
  return d;
}

} // namespace memnet
