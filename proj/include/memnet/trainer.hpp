#pragma once

/*!
  \file trainer.hpp
  \brief Staged genetic optimization of device states

  A chromosome is the flat device-state string of a network in canonical
  layout (layer order, cell order, input devices then reference device).
  Training runs an ordered list of stages; each stage evolves only the bits
  of its target layer (or all bits) while every other bit stays frozen at
  the incoming elite.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bits.hpp"
#include "dataset.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace memnet
{

struct chromosome
{
  bit_vector bits;

  std::size_t size() const { return bits.size(); }
  friend bool operator==( chromosome const&, chromosome const& ) = default;
};

inline chromosome encode( memory_network const& net ) { return { net.states() }; }

inline memory_network decode( chromosome const& c, tree_topology const& topology, circuit_params const& params = {},
                              inverter_model const& inverter = {} )
{
  memory_network net( topology, params, inverter );
  net.assign_states( c.bits );
  return net;
}

enum class objective_kind
{
  accuracy,
  accuracy_plus_margin,
  /* fraction of matching target bits; used for multi-bit codeword targets */
  bit_accuracy
};

/* cells whose |v - vth| enters the margin term */
enum class margin_scope
{
  final_layer,
  all_cells
};

struct objective
{
  objective_kind kind = objective_kind::accuracy;
  double lambda = 0.1;
  margin_scope scope = margin_scope::final_layer;

  static objective accuracy() { return {}; }
  static objective accuracy_plus_margin( double lambda = 0.1, margin_scope scope = margin_scope::final_layer )
  {
    return { objective_kind::accuracy_plus_margin, lambda, scope };
  }
  static objective bit_accuracy() { return { objective_kind::bit_accuracy, 0.0 }; }

  /* best attainable score, if bounded */
  std::optional<double> ceiling() const
  {
    return kind == objective_kind::accuracy_plus_margin ? std::nullopt : std::optional<double>( 1.0 );
  }

  friend bool operator==( objective const&, objective const& ) = default;
};

namespace detail
{

inline void check_training_data( tree_topology const& topology, dataset const& data )
{
  data.validate();
  if ( !data.has_targets() )
    throw std::invalid_argument( "training data has no target bits" );
  if ( data.input_width() != topology.n_inputs )
    throw std::invalid_argument( "dataset has " + std::to_string( data.input_width() ) + " input bits, network expects " +
                                 std::to_string( topology.n_inputs ) );
  if ( data.target_width() != topology.n_outputs )
    throw std::invalid_argument( "dataset has " + std::to_string( data.target_width() ) +
                                 " target bits, network produces " + std::to_string( topology.n_outputs ) );
}

} // namespace detail

/*! \brief Deterministic training score of a network on a dataset (digital evaluation).

  `accuracy` counts samples whose whole output equals the target;
  `accuracy_plus_margin` adds `lambda` times the mean `|v - vth| / vdd` over
  samples and final-layer cells (or all cells, per `scope`); `bit_accuracy`
  counts matching bits.
*/
inline double fitness( memory_network const& net, dataset const& data, objective const& obj )
{
  detail::check_training_data( net.topology(), data );
  std::size_t hits = 0;
  std::size_t bit_hits = 0;
  double margin_sum = 0.0;
  forward_trace tr;
  forward_workspace ws;
  auto const last = net.num_layers() - 1;
  auto const out_begin = obj.scope == margin_scope::all_cells ? 0 : net.layer_begin( last );
  auto const out_end = net.layer_end( last );
  for ( std::size_t s = 0; s < data.size(); ++s )
  {
    auto const& out = network_forward( net, data.inputs[s], eval_mode::digital, ws,
                                       obj.kind == objective_kind::accuracy_plus_margin ? &tr : nullptr );
    auto const& target = data.targets[s];
    hits += out == target ? 1u : 0u;
    bit_hits += out.size() - hamming_distance( out, target );
    if ( obj.kind == objective_kind::accuracy_plus_margin )
    {
      for ( std::size_t k = out_begin; k < out_end; ++k )
        margin_sum += std::abs( tr.node_voltages[k] - net.params().vth ) / net.params().vdd;
    }
  }
  double const n = static_cast<double>( data.size() );
  switch ( obj.kind )
  {
  case objective_kind::accuracy:
    return static_cast<double>( hits ) / n;
  case objective_kind::bit_accuracy:
    return static_cast<double>( bit_hits ) / ( n * static_cast<double>( data.target_width() ) );
  case objective_kind::accuracy_plus_margin:
    return static_cast<double>( hits ) / n +
           obj.lambda * margin_sum / ( n * static_cast<double>( out_end - out_begin ) );
  }
  return 0.0;
}

/*! \brief One phase of staged training. `target_layer` empty means all layers. */
struct stage_config
{
  std::optional<std::size_t> target_layer;
  std::size_t generations = 200;
  double mutation_rate = 0.05;
  double crossover_rate = 0.9;
  std::size_t population = 32;
  std::size_t elitism = 1;

  void validate() const
  {
    if ( population < 2 )
      throw std::invalid_argument( "stage population must be at least 2" );
    if ( elitism < 1 || elitism >= population )
      throw std::invalid_argument( "stage elitism must be in 1..population-1" );
    if ( !( mutation_rate >= 0.0 && mutation_rate <= 1.0 ) || !( crossover_rate >= 0.0 && crossover_rate <= 1.0 ) )
      throw std::invalid_argument( "stage rates must lie in [0, 1]" );
  }

  friend bool operator==( stage_config const&, stage_config const& ) = default;
};

struct train_schedule
{
  std::vector<stage_config> stages;
  memnet::objective objective;
  std::uint64_t master_seed = 0;
  /* end training once a bounded objective reaches its ceiling */
  bool stop_at_ceiling = true;

  void validate( tree_topology const& topology ) const
  {
    if ( stages.empty() )
      throw std::invalid_argument( "schedule has no stages" );
    for ( auto const& s : stages )
    {
      s.validate();
      if ( s.target_layer && *s.target_layer >= topology.layers.size() )
        throw std::invalid_argument( "stage targets layer " + std::to_string( *s.target_layer ) + " but network has " +
                                     std::to_string( topology.layers.size() ) + " layers" );
    }
    if ( objective.kind == objective_kind::accuracy_plus_margin && !( objective.lambda >= 0.0 ) )
      throw std::invalid_argument( "margin weight must be non-negative" );
  }

  /*! \brief One stage per layer bottom-up, then one stage over all bits.

    Each stage's mutation rate is one expected flip per individual over its
    target bits.
  */
  static train_schedule layerwise( tree_topology const& topology, std::uint64_t seed, std::size_t generations_per_stage = 200,
                                   std::size_t population = 32, memnet::objective obj = {} )
  {
    train_schedule s;
    s.objective = obj;
    s.master_seed = seed;
    auto const offsets = topology.layer_bit_offsets();
    auto const stage = [&]( std::optional<std::size_t> layer, std::size_t bits ) {
      stage_config c;
      c.target_layer = layer;
      c.generations = generations_per_stage;
      c.population = population;
      c.mutation_rate = std::min( 0.5, 1.0 / static_cast<double>( std::max<std::size_t>( bits, 1 ) ) );
      return c;
    };
    for ( std::size_t l = 0; l < topology.layers.size(); ++l )
      s.stages.push_back( stage( l, offsets[l + 1] - offsets[l] ) );
    s.stages.push_back( stage( std::nullopt, offsets.back() ) );
    return s;
  }
};

/* half-open range of chromosome positions */
struct bit_range
{
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains( std::size_t i ) const { return i >= begin && i < end; }
};

inline bit_range stage_bits( tree_topology const& topology, stage_config const& stage )
{
  auto const offsets = topology.layer_bit_offsets();
  if ( !stage.target_layer )
    return { 0, offsets.back() };
  return { offsets.at( *stage.target_layer ), offsets.at( *stage.target_layer + 1 ) };
}

struct scored_population
{
  std::vector<chromosome> members;
  std::vector<double> fitness;

  std::size_t best_index() const
  {
    // first maximum: ties favor the lower index, which holds the elite
    return static_cast<std::size_t>( std::max_element( fitness.begin(), fitness.end() ) - fitness.begin() );
  }
  double best_fitness() const { return fitness.at( best_index() ); }
};

/* identifies the random stream family of one generation */
struct generation_key
{
  std::uint64_t master_seed = 0;
  std::uint64_t stage = 0;
  std::uint64_t generation = 0;
};

/*! \brief Produces the next generation.

  The `elitism` fittest members are copied unchanged to the front. Every
  other slot is filled by two size-2 tournaments, single-point crossover
  (cut inside `target`) and per-bit mutation restricted to `target`. Each
  slot draws from its own stream keyed by `(key, slot)`, and offspring
  fitness is computed with `fit` on up to `threads` workers.
*/
template<class FitnessFn>
scored_population evolve_generation( scored_population const& pop, stage_config const& stage, bit_range target,
                                     FitnessFn&& fit, generation_key key, std::size_t threads = 1 )
{
  if ( pop.members.empty() )
    throw std::invalid_argument( "evolve_generation: empty population" );
  if ( pop.fitness.size() != pop.members.size() )
    throw std::invalid_argument( "evolve_generation: fitness list does not match population" );
  auto const len = pop.members.front().size();
  for ( auto const& m : pop.members )
  {
    if ( m.size() != len )
      throw std::invalid_argument( "evolve_generation: chromosomes differ in length" );
  }
  if ( target.end > len || target.begin > target.end )
    throw std::invalid_argument( "evolve_generation: target range outside chromosome" );

  auto const n = pop.members.size();
  auto const elites = std::min( stage.elitism, n );

  std::vector<std::size_t> order( n );
  for ( std::size_t i = 0; i < n; ++i )
    order[i] = i;
  std::stable_sort( order.begin(), order.end(),
                    [&]( std::size_t a, std::size_t b ) { return pop.fitness[a] > pop.fitness[b]; } );

  scored_population next;
  next.members.resize( n );
  next.fitness.resize( n );
  for ( std::size_t e = 0; e < elites; ++e )
  {
    next.members[e] = pop.members[order[e]];
    next.fitness[e] = pop.fitness[order[e]];
  }

  auto const tournament = [&]( random_stream& rng ) {
    auto const a = rng.below( n );
    auto const b = rng.below( n );
    if ( pop.fitness[a] != pop.fitness[b] )
      return pop.fitness[a] > pop.fitness[b] ? a : b;
    return std::min( a, b );
  };

  for ( std::size_t i = elites; i < n; ++i )
  {
    random_stream rng( key.master_seed, { key.stage, key.generation, i } );
    auto const& a = pop.members[tournament( rng )];
    auto const& b = pop.members[tournament( rng )];
    chromosome child = a;
    if ( target.size() >= 2 && rng.bernoulli( stage.crossover_rate ) )
    {
      auto const cut = target.begin + 1 + rng.below( target.size() - 1 );
      std::copy( b.bits.begin() + static_cast<std::ptrdiff_t>( cut ), b.bits.end(),
                 child.bits.begin() + static_cast<std::ptrdiff_t>( cut ) );
    }
    if ( stage.mutation_rate > 0.0 )
    {
      for ( std::size_t j = target.begin; j < target.end; ++j )
      {
        if ( rng.bernoulli( stage.mutation_rate ) )
          child.bits[j] ^= 1u;
      }
    }
    next.members[i] = std::move( child );
  }

  parallel_for( n - elites, threads, [&]( std::size_t j ) {
    next.fitness[elites + j] = fit( next.members[elites + j] );
  } );
  return next;
}

struct generation_record
{
  std::size_t stage = 0;
  std::size_t generation = 0;
  double best_fitness = 0.0;
};

struct train_result
{
  memory_network network;
  chromosome best;
  double best_fitness = 0.0;
  std::vector<generation_record> history;
  /* elite chromosome at the end of each stage */
  std::vector<chromosome> stage_elites;
};

namespace detail
{

inline constexpr std::uint64_t init_stream_key = 0xffffffffffffULL;

inline void randomize_bits( chromosome& c, bit_range r, random_stream& rng )
{
  for ( std::size_t j = r.begin; j < r.end; ++j )
    c.bits[j] = rng.bernoulli( 0.5 ) ? 1 : 0;
}

} // namespace detail

/*! \brief Runs every stage of `schedule` and returns the best network found.

  The starting chromosome is drawn with each bit ON at probability 1/2. At
  the start of each stage the population holds the incoming elite plus
  copies of it whose target bits are redrawn at random.
*/
inline train_result train( tree_topology const& topology, dataset const& data, train_schedule const& schedule,
                           circuit_params const& params = {}, inverter_model const& inverter = {}, std::size_t threads = 1 )
{
  topology.validate();
  schedule.validate( topology );
  detail::check_training_data( topology, data );

  auto const fit = [&]( chromosome const& c ) { return fitness( decode( c, topology, params, inverter ), data, schedule.objective ); };
  auto const ceiling = schedule.objective.ceiling();
  auto const n_bits = topology.num_devices();

  train_result result;
  {
    random_stream rng( schedule.master_seed, { detail::init_stream_key } );
    result.best.bits.assign( n_bits, 0 );
    detail::randomize_bits( result.best, { 0, n_bits }, rng );
  }
  result.best_fitness = fit( result.best );

  bool done = schedule.stop_at_ceiling && ceiling && result.best_fitness >= *ceiling;
  for ( std::size_t s = 0; s < schedule.stages.size(); ++s )
  {
    auto const& stage = schedule.stages[s];
    auto const target = stage_bits( topology, stage );
    if ( done )
    {
      result.stage_elites.push_back( result.best );
      continue;
    }

    scored_population pop;
    pop.members.assign( stage.population, result.best );
    pop.fitness.assign( stage.population, result.best_fitness );
    for ( std::size_t i = 1; i < stage.population; ++i )
    {
      random_stream rng( schedule.master_seed, { s, detail::init_stream_key, i } );
      detail::randomize_bits( pop.members[i], target, rng );
    }
    parallel_for( stage.population - 1, threads, [&]( std::size_t j ) { pop.fitness[j + 1] = fit( pop.members[j + 1] ); } );
    result.history.push_back( { s, 0, pop.best_fitness() } );

    for ( std::size_t g = 1; g <= stage.generations; ++g )
    {
      if ( schedule.stop_at_ceiling && ceiling && pop.best_fitness() >= *ceiling )
      {
        done = true;
        break;
      }
      pop = evolve_generation( pop, stage, target, fit, { schedule.master_seed, s, g }, threads );
      result.history.push_back( { s, g, pop.best_fitness() } );
    }
    if ( schedule.stop_at_ceiling && ceiling && pop.best_fitness() >= *ceiling )
      done = true;

    auto const b = pop.best_index();
    result.best = pop.members[b];
    result.best_fitness = pop.fitness[b];
    result.stage_elites.push_back( result.best );
  }

  result.network = decode( result.best, topology, params, inverter );
  return result;
}

struct brute_force_result
{
  double best_score = 0.0;
  chromosome best;
};

inline constexpr std::size_t brute_force_bit_limit = 20;

/*! \brief Exhaustive optimum over all device-state strings.

  Candidates are visited in lexicographic order of the bit string, so the
  reported optimum is the lexicographically smallest among ties.
*/
inline brute_force_result brute_force_best( tree_topology const& topology, dataset const& data, objective const& obj,
                                            circuit_params const& params = {}, inverter_model const& inverter = {} )
{
  topology.validate();
  if ( data.inputs.empty() )
    throw std::invalid_argument( "brute_force_best: empty dataset" );
  detail::check_training_data( topology, data );
  auto const n_bits = topology.num_devices();
  if ( n_bits > brute_force_bit_limit )
    throw std::invalid_argument( "brute_force_best: " + std::to_string( n_bits ) + " device bits exceed the limit of " +
                                 std::to_string( brute_force_bit_limit ) );

  memory_network net( topology, params, inverter );
  brute_force_result r;
  r.best_score = -std::numeric_limits<double>::infinity();
  bit_vector bits( n_bits );
  for ( std::uint64_t v = 0; v < ( std::uint64_t{ 1 } << n_bits ); ++v )
  {
    for ( std::size_t i = 0; i < n_bits; ++i )
      bits[i] = static_cast<std::uint8_t>( ( v >> ( n_bits - 1 - i ) ) & 1u );
    net.assign_states( bits );
    double const score = fitness( net, data, obj );
    if ( score > r.best_score )
    {
      r.best_score = score;
      r.best.bits = bits;
    }
  }
  return r;
}

} // namespace memnet
