#pragma once

/*!
  \file network.hpp
  \brief Memory network value type and forward evaluation
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"
#include "circuit.hpp"
#include "topology.hpp"

namespace memnet
{

struct cell
{
  std::vector<device_state> input_devices;
  device_state reference_device = device_state::off;
  std::vector<std::size_t> source_indices;

  std::size_t fan_in() const { return input_devices.size(); }

  friend bool operator==( cell const&, cell const& ) = default;
};

/*! \brief A cell whose output is forced to a supply rail. */
enum class stuck_at : std::uint8_t
{
  low,
  high
};

enum class eval_mode : std::uint8_t
{
  digital,
  analog
};

/*! \brief Topology plus one binary state per device.

  Cells are stored in layer order. Device `i` of a cell lives at bit
  `cell_bit_offset(k) + i` of the canonical layout, the reference device at
  `cell_bit_offset(k) + fan_in`. A network may additionally carry explicit
  per-device conductances (after perturbation) and per-cell stuck-at faults.
*/
class memory_network
{
public:
  memory_network() = default;

  /*! \brief All devices OFF. */
  memory_network( tree_topology topology, circuit_params params = {}, inverter_model inverter = {} )
      : topology_( std::move( topology ) ), params_( params ), inverter_( inverter )
  {
    topology_.validate();
    params_.validate();
    inverter_.validate();
    for ( auto const& l : topology_.layers )
    {
      for ( auto const& w : l.wiring )
      {
        cell c;
        c.input_devices.assign( w.size(), device_state::off );
        c.source_indices = w;
        cells_.push_back( std::move( c ) );
      }
    }
    index_cells();
  }

  tree_topology const& topology() const { return topology_; }
  circuit_params const& params() const { return params_; }
  inverter_model const& inverter() const { return inverter_; }
  std::vector<cell> const& cells() const { return cells_; }

  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_devices() const { return bit_offsets_.back(); }
  std::size_t num_layers() const { return topology_.layers.size(); }

  std::size_t layer_begin( std::size_t layer ) const { return layer_begin_.at( layer ); }
  std::size_t layer_end( std::size_t layer ) const { return layer_begin_.at( layer + 1 ); }
  std::size_t cell_bit_offset( std::size_t k ) const { return bit_offsets_.at( k ); }
  std::size_t layer_of( std::size_t k ) const
  {
    std::size_t l = 0;
    while ( layer_begin_[l + 1] <= k )
      ++l;
    return l;
  }

  void set_input_device( std::size_t k, std::size_t i, device_state s ) { cells_.at( k ).input_devices.at( i ) = s; }
  void set_reference_device( std::size_t k, device_state s ) { cells_.at( k ).reference_device = s; }
  void set_inverter( inverter_model m )
  {
    m.validate();
    inverter_ = m;
  }

  /* device state at canonical bit position */
  device_state device( std::size_t bit ) const
  {
    auto const [k, i] = locate( bit );
    return i == cells_[k].fan_in() ? cells_[k].reference_device : cells_[k].input_devices[i];
  }
  void set_device( std::size_t bit, device_state s )
  {
    auto const [k, i] = locate( bit );
    if ( i == cells_[k].fan_in() )
      cells_[k].reference_device = s;
    else
      cells_[k].input_devices[i] = s;
  }

  /* canonical layout: per cell, input devices then the reference device; 1 = ON */
  void assign_states( std::span<const std::uint8_t> bits )
  {
    if ( bits.size() != num_devices() )
      throw std::invalid_argument( "state string has " + std::to_string( bits.size() ) + " bits, network has " +
                                   std::to_string( num_devices() ) + " devices" );
    std::size_t pos = 0;
    auto const state = []( std::uint8_t b ) { return b ? device_state::on : device_state::off; };
    for ( auto& c : cells_ )
    {
      for ( auto& d : c.input_devices )
        d = state( bits[pos++] );
      c.reference_device = state( bits[pos++] );
    }
  }

  bit_vector states() const
  {
    bit_vector bits;
    bits.reserve( num_devices() );
    for ( auto const& c : cells_ )
    {
      for ( auto d : c.input_devices )
        bits.push_back( d == device_state::on ? 1 : 0 );
      bits.push_back( c.reference_device == device_state::on ? 1 : 0 );
    }
    return bits;
  }

  bool has_conductances() const { return !conductances_.empty(); }
  std::vector<double> const& conductances() const { return conductances_; }
  void set_conductances( std::vector<double> g )
  {
    if ( !g.empty() && g.size() != num_devices() )
      throw std::invalid_argument( "conductance list length differs from device count" );
    for ( double x : g )
    {
      if ( !( x > 0.0 ) || !std::isfinite( x ) )
        throw std::invalid_argument( "conductances must be positive and finite" );
    }
    conductances_ = std::move( g );
  }

  /* conductance actually used for a device, honoring perturbation */
  double device_conductance( std::size_t bit ) const
  {
    return has_conductances() ? conductances_.at( bit ) : conductance( device( bit ), params_ );
  }

  bool has_faults() const { return !faults_.empty(); }
  std::optional<stuck_at> fault( std::size_t k ) const { return faults_.empty() ? std::nullopt : faults_.at( k ); }
  std::vector<std::optional<stuck_at>> const& faults() const { return faults_; }
  void set_fault( std::size_t k, std::optional<stuck_at> f )
  {
    if ( faults_.empty() )
      faults_.assign( cells_.size(), std::nullopt );
    faults_.at( k ) = f;
  }
  void clear_faults() { faults_.clear(); }

  friend bool operator==( memory_network const& a, memory_network const& b )
  {
    auto const norm = []( std::vector<std::optional<stuck_at>> const& f, std::size_t n ) {
      return f.empty() ? std::vector<std::optional<stuck_at>>( n ) : f;
    };
    return a.topology_ == b.topology_ && a.params_ == b.params_ && a.inverter_ == b.inverter_ && a.cells_ == b.cells_ &&
           a.conductances_ == b.conductances_ && norm( a.faults_, a.num_cells() ) == norm( b.faults_, b.num_cells() );
  }

private:
  void index_cells()
  {
    layer_begin_ = { 0 };
    for ( auto const& l : topology_.layers )
      layer_begin_.push_back( layer_begin_.back() + l.width() );
    bit_offsets_ = { 0 };
    for ( auto const& c : cells_ )
      bit_offsets_.push_back( bit_offsets_.back() + c.fan_in() + 1 );
  }

  std::pair<std::size_t, std::size_t> locate( std::size_t bit ) const
  {
    if ( bit >= num_devices() )
      throw std::out_of_range( "device index out of range" );
    // offsets are sorted; binary search for the owning cell
    auto it = std::upper_bound( bit_offsets_.begin(), bit_offsets_.end(), bit );
    std::size_t const k = static_cast<std::size_t>( it - bit_offsets_.begin() ) - 1;
    return { k, bit - bit_offsets_[k] };
  }

  tree_topology topology_;
  circuit_params params_;
  inverter_model inverter_;
  std::vector<cell> cells_;
  std::vector<double> conductances_;
  std::vector<std::optional<stuck_at>> faults_;
  std::vector<std::size_t> layer_begin_{ 0 };
  std::vector<std::size_t> bit_offsets_{ 0 };
};

/*! \brief Per-cell record of one forward pass, in cell order. */
struct forward_trace
{
  std::vector<double> node_voltages;
  std::vector<double> outputs;
  bit_vector bits;
};

/*! \brief Output voltage of one cell given the voltages of the lines below it.

  `upstream` is indexed by line; lines past its end are constant-0 padding.
  Digital mode always uses the ideal inverter.
*/
inline double cell_forward( memory_network const& net, std::size_t k, std::span<const double> upstream, eval_mode mode,
                            double* node = nullptr, bool* bit = nullptr )
{
  auto const& c = net.cells()[k];
  auto const& p = net.params();
  double v_in[max_fan_in];
  double g_in[max_fan_in];
  std::size_t const base = net.cell_bit_offset( k );
  for ( std::size_t i = 0; i < c.fan_in(); ++i )
  {
    auto const s = c.source_indices[i];
    v_in[i] = s < upstream.size() ? upstream[s] : 0.0;
    g_in[i] = net.has_conductances() ? net.conductances()[base + i] : conductance( c.input_devices[i], p );
  }
  double const g_ref =
      net.has_conductances() ? net.conductances()[base + c.fan_in()] : conductance( c.reference_device, p );
  double const v = node_voltage( std::span<const double>( v_in, c.fan_in() ), std::span<const double>( g_in, c.fan_in() ),
                                 g_ref, p );
  if ( node )
    *node = v;

  if ( auto f = net.fault( k ) )
  {
    if ( bit )
      *bit = *f == stuck_at::high;
    return *f == stuck_at::high ? p.vdd : 0.0;
  }
  auto const model = mode == eval_mode::digital ? inverter_model::ideal() : net.inverter();
  double const swing = inverter_swing( v, model, p );
  if ( bit )
    *bit = swing > 0.0;
  double const out = 0.5 * p.vdd + swing;
  return out < 0.0 ? 0.0 : ( out > p.vdd ? p.vdd : out );
}

/* scratch buffers reused across forward passes */
struct forward_workspace
{
  std::vector<double> signals;
  std::vector<double> next;
  bit_vector outputs;
};

/*! \brief Bottom-up evaluation; returns the final-layer bits.

  Primary inputs are driven at rail voltages. In analog mode the continuous
  inverter outputs are fed to the next layer. Each cell's bit is obtained by
  comparing its output with `vdd/2`. The returned reference points into `ws`.
*/
inline bit_vector const& network_forward( memory_network const& net, bit_vector const& input_bits, eval_mode mode,
                                          forward_workspace& ws, forward_trace* trace = nullptr )
{
  auto const& topo = net.topology();
  if ( input_bits.size() != topo.n_inputs )
  {
    throw std::invalid_argument( "network_forward: expected " + std::to_string( topo.n_inputs ) + " input bits, got " +
                                 std::to_string( input_bits.size() ) );
  }
  auto const vdd = net.params().vdd;
  auto& signals = ws.signals;
  auto& next = ws.next;
  signals.resize( input_bits.size() );
  for ( std::size_t i = 0; i < input_bits.size(); ++i )
  {
    signals[i] = input_bits[i] ? vdd : 0.0;
  }
  if ( trace )
  {
    trace->node_voltages.assign( net.num_cells(), 0.0 );
    trace->outputs.assign( net.num_cells(), 0.0 );
    trace->bits.assign( net.num_cells(), 0 );
  }

  ws.outputs.clear();
  for ( std::size_t l = 0; l < net.num_layers(); ++l )
  {
    auto const begin = net.layer_begin( l );
    auto const end = net.layer_end( l );
    next.resize( end - begin );
    bool const last = l + 1 == net.num_layers();
    for ( std::size_t k = begin; k < end; ++k )
    {
      double node = 0.0;
      bool bit = false;
      next[k - begin] = cell_forward( net, k, signals, mode, &node, &bit );
      if ( trace )
      {
        trace->node_voltages[k] = node;
        trace->outputs[k] = next[k - begin];
        trace->bits[k] = bit ? 1 : 0;
      }
      if ( last )
        ws.outputs.push_back( bit ? 1 : 0 );
    }
    signals.swap( next );
  }
  return ws.outputs;
}

inline bit_vector network_forward( memory_network const& net, bit_vector const& input_bits, eval_mode mode,
                                   forward_trace* trace = nullptr )
{
  forward_workspace ws;
  return network_forward( net, input_bits, mode, ws, trace );
}

struct cell_margin
{
  double node_voltage = 0.0;
  /* node voltage minus vth; negative means the cell outputs 1 */
  double margin = 0.0;
  /* set when the output is forced and the margin does not decide the bit */
  std::optional<stuck_at> stuck;
};

/*! \brief Node voltage and signed threshold margin of every cell under digital evaluation. */
inline std::vector<cell_margin> margin_profile( memory_network const& net, bit_vector const& input_bits )
{
  forward_trace tr;
  network_forward( net, input_bits, eval_mode::digital, &tr );
  std::vector<cell_margin> m( net.num_cells() );
  for ( std::size_t k = 0; k < net.num_cells(); ++k )
  {
    m[k].node_voltage = tr.node_voltages[k];
    m[k].margin = tr.node_voltages[k] - net.params().vth;
    m[k].stuck = net.fault( k );
  }
  return m;
}

} // namespace memnet
