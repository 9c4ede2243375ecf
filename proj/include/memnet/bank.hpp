#pragma once

/*!
  \file bank.hpp
  \brief Multiclass classifier: one memory network per class plus a nearest-codeword decision

  Network `c` is trained to emit codeword `c` on samples of class `c` and its
  complement on every other sample. At inference each network is scored by
  the negated Hamming distance between its output and its own codeword.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"
#include "dataset.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "robustness.hpp"
#include "trainer.hpp"

namespace memnet
{

struct codebook
{
  std::size_t n_classes = 0;
  std::size_t n_bits = 0;
  std::size_t min_distance = 0;
  std::vector<bit_vector> codewords;

  void validate() const
  {
    if ( codewords.size() != n_classes )
      throw std::invalid_argument( "codebook: codeword count differs from class count" );
    for ( std::size_t a = 0; a < codewords.size(); ++a )
    {
      if ( codewords[a].size() != n_bits )
        throw std::invalid_argument( "codebook: codeword width mismatch" );
      for ( std::size_t b = a + 1; b < codewords.size(); ++b )
      {
        auto const d = hamming_distance( codewords[a], codewords[b] );
        if ( d == 0 || d < min_distance )
          throw std::invalid_argument( "codebook: codewords " + std::to_string( a ) + " and " + std::to_string( b ) +
                                       " are too close" );
      }
    }
  }
};

inline constexpr std::size_t max_bank_classes = 32;

namespace detail
{
inline constexpr std::size_t restart_after = 1000;
}

/*! \brief Seeded rejection sampling of `n_classes` codewords with pairwise distance at least `min_distance`. */
inline codebook make_codewords( std::size_t n_classes, std::size_t n_bits, std::size_t min_distance, std::uint64_t seed,
                                std::size_t budget = 100000 )
{
  if ( n_classes == 0 || n_classes > max_bank_classes )
    throw std::invalid_argument( "make_codewords: class count must be in 1.." + std::to_string( max_bank_classes ) );
  if ( n_bits == 0 || n_bits > 64 )
    throw std::invalid_argument( "make_codewords: codeword width must be in 1..64" );
  if ( min_distance > n_bits )
    throw std::invalid_argument( "make_codewords: minimum distance exceeds codeword width" );

  codebook cb{ n_classes, n_bits, min_distance, {} };
  random_stream rng( seed, { 0xc0deULL } );
  std::size_t draws = 0;
  std::size_t rejected_in_row = 0;
  while ( cb.codewords.size() < n_classes )
  {
    if ( draws++ >= budget )
      throw std::runtime_error( "make_codewords: no codebook found within the sampling budget" );
    // a maximal partial code accepts nothing more; start over
    if ( rejected_in_row == detail::restart_after )
    {
      cb.codewords.clear();
      rejected_in_row = 0;
    }
    bit_vector w( n_bits );
    for ( auto& b : w )
      b = rng.bernoulli( 0.5 ) ? 1 : 0;
    bool ok = true;
    for ( auto const& c : cb.codewords )
    {
      auto const d = hamming_distance( c, w );
      if ( d == 0 || d < min_distance )
      {
        ok = false;
        break;
      }
    }
    if ( ok )
    {
      cb.codewords.push_back( std::move( w ) );
      rejected_in_row = 0;
    }
    else
      ++rejected_in_row;
  }
  return cb;
}

struct classifier_bank
{
  std::vector<memory_network> networks;
  memnet::codebook codebook;

  std::size_t n_classes() const { return networks.size(); }
};

inline classifier_bank build_bank( tree_topology const& templ, std::size_t n_classes, codebook const& cb,
                                   circuit_params const& params = {}, inverter_model const& inverter = {} )
{
  cb.validate();
  if ( cb.n_classes != n_classes )
    throw std::invalid_argument( "build_bank: codebook has " + std::to_string( cb.n_classes ) + " classes, expected " +
                                 std::to_string( n_classes ) );
  if ( templ.n_outputs != cb.n_bits )
    throw std::invalid_argument( "build_bank: network output width " + std::to_string( templ.n_outputs ) +
                                 " differs from codeword width " + std::to_string( cb.n_bits ) );
  classifier_bank bank;
  bank.codebook = cb;
  bank.networks.assign( n_classes, memory_network( templ, params, inverter ) );
  return bank;
}

/* per-sample targets for network `c`: its codeword on class `c`, the complement elsewhere */
inline dataset one_vs_rest_targets( dataset const& data, codebook const& cb, std::size_t c )
{
  dataset d;
  d.inputs = data.inputs;
  d.classes = data.classes;
  d.class_names = data.class_names;
  d.targets.reserve( data.size() );
  auto const inverse = complement( cb.codewords.at( c ) );
  for ( auto k : data.classes )
    d.targets.push_back( k == c ? cb.codewords[c] : inverse );
  return d;
}

struct bank_training
{
  classifier_bank bank;
  std::vector<std::vector<generation_record>> histories;
  std::vector<std::string> warnings;
};

/*! \brief Trains every network independently; class `c` uses master seed `derive_seed(seed, {c})`.

  A class without samples is reported in `warnings` and left untouched.
*/
inline bank_training train_bank( classifier_bank const& bank, dataset const& data, train_schedule const& schedule,
                                 std::size_t threads = 1 )
{
  data.validate();
  if ( !data.has_classes() )
    throw std::invalid_argument( "train_bank: dataset has no class labels" );
  for ( auto c : data.classes )
  {
    if ( c >= bank.n_classes() )
      throw std::invalid_argument( "train_bank: class label " + std::to_string( c ) + " outside the bank" );
  }

  bank_training out;
  out.bank = bank;
  out.histories.resize( bank.n_classes() );
  for ( std::size_t c = 0; c < bank.n_classes(); ++c )
  {
    if ( std::find( data.classes.begin(), data.classes.end(), c ) == data.classes.end() )
    {
      auto const name = c < data.class_names.size() ? data.class_names[c] : std::to_string( c );
      out.warnings.push_back( "class " + name + " has no samples; network left untrained" );
      continue;
    }
    auto const& net = bank.networks[c];
    auto s = schedule;
    s.master_seed = derive_seed( schedule.master_seed, { c } );
    auto r = train( net.topology(), one_vs_rest_targets( data, bank.codebook, c ), s, net.params(), net.inverter(), threads );
    out.bank.networks[c] = std::move( r.network );
    out.histories[c] = std::move( r.history );
  }
  return out;
}

struct classification
{
  std::size_t winner = 0;
  std::vector<long> scores;
  std::vector<double> margin_sums;
};

/*! \brief Nearest-codeword decision.

  `score(c) = -hamming(output_c, codeword_c)`. Ties go to the larger sum of
  final-layer `|v - vth|`, then to the smaller class index.
*/
inline classification classify( classifier_bank const& bank, bit_vector const& input_bits )
{
  if ( bank.networks.empty() )
    throw std::invalid_argument( "classify: empty bank" );
  classification r;
  r.scores.resize( bank.n_classes() );
  r.margin_sums.resize( bank.n_classes() );
  forward_trace tr;
  for ( std::size_t c = 0; c < bank.n_classes(); ++c )
  {
    auto const& net = bank.networks[c];
    auto const out = network_forward( net, input_bits, eval_mode::digital, &tr );
    r.scores[c] = -static_cast<long>( hamming_distance( out, bank.codebook.codewords.at( c ) ) );
    auto const last = net.num_layers() - 1;
    double sum = 0.0;
    for ( std::size_t k = net.layer_begin( last ); k < net.layer_end( last ); ++k )
      sum += std::abs( tr.node_voltages[k] - net.params().vth );
    r.margin_sums[c] = sum;
  }
  for ( std::size_t c = 1; c < bank.n_classes(); ++c )
  {
    auto const w = r.winner;
    if ( r.scores[c] > r.scores[w] || ( r.scores[c] == r.scores[w] && r.margin_sums[c] > r.margin_sums[w] ) )
      r.winner = c;
  }
  return r;
}

inline double bank_accuracy( classifier_bank const& bank, dataset const& data )
{
  data.validate();
  if ( !data.has_classes() )
    throw std::invalid_argument( "bank_accuracy: dataset has no class labels" );
  std::size_t hits = 0;
  for ( std::size_t s = 0; s < data.size(); ++s )
    hits += classify( bank, data.inputs[s] ).winner == data.classes[s] ? 1u : 0u;
  return static_cast<double>( hits ) / static_cast<double>( data.size() );
}

/*! \brief Forces `floor(rate * total cells)` cells of the whole bank to a rail.

  Cells are drawn uniformly without replacement across all networks.
*/
inline classifier_bank inject_bank_faults( classifier_bank const& bank, double rate, stuck_at kind, random_stream& rng )
{
  fault_spec{ rate, kind, {} }.validate();
  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for ( std::size_t c = 0; c < bank.n_classes(); ++c )
  {
    for ( std::size_t k = 0; k < bank.networks[c].num_cells(); ++k )
      pool.emplace_back( c, k );
  }
  auto const count = static_cast<std::size_t>( std::floor( rate * static_cast<double>( pool.size() ) ) );
  classifier_bank out = bank;
  for ( std::size_t i = 0; i < count; ++i )
  {
    auto const j = i + rng.below( pool.size() - i );
    std::swap( pool[i], pool[j] );
    out.networks[pool[i].first].set_fault( pool[i].second, kind );
  }
  return out;
}

/*! \brief Mean bank accuracy over `seeds` fault draws per rate; draw `i` uses stream `(master_seed, i)` at every rate. */
inline std::vector<fault_row> bank_fault_sweep( classifier_bank const& bank, dataset const& data,
                                                std::vector<double> const& rates, stuck_at kind, std::size_t seeds,
                                                std::uint64_t master_seed, std::size_t threads = 1 )
{
  if ( rates.empty() || seeds == 0 )
    throw std::invalid_argument( "bank_fault_sweep: need at least one rate and one seed" );
  std::vector<fault_row> rows;
  for ( double rate : rates )
  {
    std::vector<double> acc( seeds, 0.0 );
    parallel_for( seeds, threads, [&]( std::size_t i ) {
      random_stream rng( master_seed, { i } );
      acc[i] = bank_accuracy( inject_bank_faults( bank, rate, kind, rng ), data );
    } );
    double sum = 0.0;
    for ( double a : acc )
      sum += a;
    rows.push_back( { rate, sum / static_cast<double>( seeds ) } );
  }
  return rows;
}

} // namespace memnet
