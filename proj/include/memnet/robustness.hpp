#pragma once

/*!
  \file robustness.hpp
  \brief Resistance tolerance, inverter nonlinearity and stuck-at faults
*/

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "trainer.hpp"

namespace memnet
{

/*! \brief Multiplicative conductance spread: `g -> g * u`, `u` uniform on `[1 - epsilon, 1 + epsilon]`. */
struct perturbation_spec
{
  double epsilon = 0.0;

  void validate() const
  {
    if ( !( epsilon >= 0.0 && epsilon < 1.0 ) )
      throw std::invalid_argument( "perturbation epsilon must lie in [0, 1)" );
  }
};

struct fault_spec
{
  double fault_rate = 0.0;
  stuck_at kind = stuck_at::high;
  /* eligible cell indices; empty means every cell */
  std::vector<std::size_t> scope;

  void validate() const
  {
    if ( !( fault_rate >= 0.0 && fault_rate <= 1.0 ) )
      throw std::invalid_argument( "fault rate must lie in [0, 1]" );
  }
};

/*! \brief Copy of `net` with every device conductance scaled by an independent draw.

  One uniform number `r` is drawn per device and mapped to
  `u = 1 + epsilon * (2r - 1)`, so streams in the same state yield
  deviations proportional to `epsilon`. `epsilon == 0` returns `net` as is.
*/
inline memory_network perturb( memory_network const& net, perturbation_spec const& spec, random_stream& rng )
{
  spec.validate();
  if ( spec.epsilon == 0.0 )
    return net;
  std::vector<double> g( net.num_devices() );
  for ( std::size_t b = 0; b < g.size(); ++b )
  {
    double const u = 1.0 + spec.epsilon * ( 2.0 * rng.uniform() - 1.0 );
    g[b] = net.device_conductance( b ) * u;
  }
  memory_network out = net;
  out.set_conductances( std::move( g ) );
  return out;
}

enum class stability
{
  guaranteed_stable,
  uncertain
};

/*! \brief Cells whose digital bit provably survives any `epsilon` perturbation.

  Scaling every conductance by a factor in `[1-e, 1+e]` keeps the node
  voltage within `[v (1-e)/(1+e), v (1+e)/(1-e)]`. A cell is guaranteed when
  that interval stays on one side of `vth` and every cell feeding it is
  guaranteed too; stuck cells are always guaranteed. A relative allowance of
  1e-12 absorbs rounding in the voltage solve.
*/
inline std::vector<stability> stability_bound_check( memory_network const& net, bit_vector const& input_bits, double epsilon )
{
  perturbation_spec{ epsilon }.validate();
  auto const margins = margin_profile( net, input_bits );
  std::vector<stability> flags( net.num_cells(), stability::guaranteed_stable );
  if ( epsilon == 0.0 )
    return flags;

  constexpr double rounding = 1e-12;
  double const up = ( 1.0 + epsilon ) / ( 1.0 - epsilon ) * ( 1.0 + rounding );
  double const down = ( 1.0 - epsilon ) / ( 1.0 + epsilon ) * ( 1.0 - rounding );
  double const vth = net.params().vth;
  for ( std::size_t l = 0; l < net.num_layers(); ++l )
  {
    auto const& layer = net.topology().layers[l];
    for ( std::size_t k = net.layer_begin( l ); k < net.layer_end( l ); ++k )
    {
      if ( net.fault( k ) )
        continue;
      double const v = margins[k].node_voltage;
      bool local = v * up < vth || v * down > vth;
      if ( local && l > 0 )
      {
        auto const below = net.layer_begin( l - 1 );
        for ( auto s : net.cells()[k].source_indices )
        {
          if ( s < layer.n_sources && flags[below + s] != stability::guaranteed_stable )
          {
            local = false;
            break;
          }
        }
      }
      flags[k] = local ? stability::guaranteed_stable : stability::uncertain;
    }
  }
  return flags;
}

struct sweep_row
{
  double epsilon = 0.0;
  double flip_rate = 0.0;
  double accuracy = 0.0;
};

/*! \brief Monte Carlo over perturbed copies of `net` for each epsilon.

  Trial `t` uses the stream keyed by `(seed, t)` for every epsilon, so the
  sampled deviations of one trial differ across rows only in scale. The
  flip rate counts (sample, output bit) pairs that differ from the nominal
  network; accuracy is the mean whole-output accuracy against the targets.
*/
inline std::vector<sweep_row> sensitivity_sweep( memory_network const& net, dataset const& data,
                                                 std::vector<double> const& epsilons, std::size_t trials, std::uint64_t seed,
                                                 std::size_t threads = 1 )
{
  if ( epsilons.empty() )
    throw std::invalid_argument( "sensitivity_sweep: no epsilon values" );
  if ( trials == 0 )
    throw std::invalid_argument( "sensitivity_sweep: need at least one trial" );
  detail::check_training_data( net.topology(), data );
  for ( double e : epsilons )
    perturbation_spec{ e }.validate();

  std::vector<bit_vector> nominal( data.size() );
  for ( std::size_t s = 0; s < data.size(); ++s )
    nominal[s] = network_forward( net, data.inputs[s], eval_mode::digital );

  std::vector<sweep_row> rows;
  for ( double e : epsilons )
  {
    std::vector<std::size_t> flips( trials, 0 );
    std::vector<std::size_t> hits( trials, 0 );
    parallel_for( trials, threads, [&]( std::size_t t ) {
      random_stream rng( seed, { t } );
      auto const p = perturb( net, { e }, rng );
      for ( std::size_t s = 0; s < data.size(); ++s )
      {
        auto const out = network_forward( p, data.inputs[s], eval_mode::digital );
        flips[t] += hamming_distance( out, nominal[s] );
        hits[t] += out == data.targets[s] ? 1u : 0u;
      }
    } );
    std::size_t total_flips = 0;
    std::size_t total_hits = 0;
    for ( std::size_t t = 0; t < trials; ++t )
    {
      total_flips += flips[t];
      total_hits += hits[t];
    }
    double const pairs = static_cast<double>( trials * data.size() * net.topology().n_outputs );
    rows.push_back( { e, static_cast<double>( total_flips ) / pairs,
                      static_cast<double>( total_hits ) / static_cast<double>( trials * data.size() ) } );
  }
  return rows;
}

/*! \brief Copy of `net` with `floor(rate * eligible)` cells forced to a rail.

  Cells are chosen uniformly without replacement from the eligible set.
*/
inline memory_network inject_faults( memory_network const& net, fault_spec const& spec, random_stream& rng )
{
  spec.validate();
  std::vector<std::size_t> pool = spec.scope;
  if ( pool.empty() )
  {
    pool.resize( net.num_cells() );
    for ( std::size_t k = 0; k < pool.size(); ++k )
      pool[k] = k;
  }
  for ( auto k : pool )
  {
    if ( k >= net.num_cells() )
      throw std::invalid_argument( "fault scope names cell " + std::to_string( k ) + " outside the network" );
  }
  auto const count = static_cast<std::size_t>( std::floor( spec.fault_rate * static_cast<double>( pool.size() ) ) );
  memory_network out = net;
  // partial Fisher-Yates
  for ( std::size_t i = 0; i < count; ++i )
  {
    auto const j = i + rng.below( pool.size() - i );
    std::swap( pool[i], pool[j] );
    out.set_fault( pool[i], spec.kind );
  }
  return out;
}

struct accumulation_row
{
  double gain = 0.0;
  /* fraction of cell bits differing from digital evaluation, per layer */
  std::vector<double> layer_mismatch;
  double overall_mismatch = 0.0;
};

/*! \brief Analog-versus-digital disagreement of every cell bit for each inverter gain. */
inline std::vector<accumulation_row> accumulation_profile( memory_network const& net, dataset const& data,
                                                           std::vector<double> const& gains )
{
  data.validate();
  if ( data.input_width() != net.topology().n_inputs )
    throw std::invalid_argument( "accumulation_profile: dataset width does not match network inputs" );
  for ( double g : gains )
  {
    if ( !( g > 0.0 ) || !std::isfinite( g ) )
      throw std::invalid_argument( "accumulation_profile: gains must be positive" );
  }

  std::vector<bit_vector> digital( data.size() );
  forward_trace tr;
  for ( std::size_t s = 0; s < data.size(); ++s )
  {
    network_forward( net, data.inputs[s], eval_mode::digital, &tr );
    digital[s] = tr.bits;
  }

  std::vector<accumulation_row> rows;
  for ( double g : gains )
  {
    memory_network analog = net;
    analog.set_inverter( inverter_model::sigmoid( g ) );
    std::vector<std::size_t> mismatches( net.num_layers(), 0 );
    for ( std::size_t s = 0; s < data.size(); ++s )
    {
      network_forward( analog, data.inputs[s], eval_mode::analog, &tr );
      for ( std::size_t k = 0; k < net.num_cells(); ++k )
      {
        if ( tr.bits[k] != digital[s][k] )
          ++mismatches[net.layer_of( k )];
      }
    }
    accumulation_row row;
    row.gain = g;
    std::size_t total = 0;
    for ( std::size_t l = 0; l < net.num_layers(); ++l )
    {
      auto const cells = net.layer_end( l ) - net.layer_begin( l );
      row.layer_mismatch.push_back( static_cast<double>( mismatches[l] ) / static_cast<double>( cells * data.size() ) );
      total += mismatches[l];
    }
    row.overall_mismatch = static_cast<double>( total ) / static_cast<double>( net.num_cells() * data.size() );
    rows.push_back( std::move( row ) );
  }
  return rows;
}

struct fault_row
{
  double fault_rate = 0.0;
  double mean_accuracy = 0.0;
};

/*! \brief Mean accuracy of `net` over `seeds` independent fault draws per rate. */
inline std::vector<fault_row> fault_sweep( memory_network const& net, dataset const& data, std::vector<double> const& rates,
                                           stuck_at kind, std::size_t seeds, std::uint64_t master_seed,
                                           std::size_t threads = 1 )
{
  if ( rates.empty() || seeds == 0 )
    throw std::invalid_argument( "fault_sweep: need at least one rate and one seed" );
  detail::check_training_data( net.topology(), data );
  std::vector<fault_row> rows;
  for ( std::size_t r = 0; r < rates.size(); ++r )
  {
    std::vector<double> acc( seeds, 0.0 );
    parallel_for( seeds, threads, [&]( std::size_t i ) {
      random_stream rng( master_seed, { i } );
      auto const f = inject_faults( net, { rates[r], kind, {} }, rng );
      acc[i] = fitness( f, data, objective::accuracy() );
    } );
    double sum = 0.0;
    for ( double a : acc )
      sum += a;
    rows.push_back( { rates[r], sum / static_cast<double>( seeds ) } );
  }
  return rows;
}

} // namespace memnet
