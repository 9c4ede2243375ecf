#pragma once

/*!
  \file circuit.hpp
  \brief Electrical model of a memory cell: resistive divider and inverter
*/

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace memnet
{

/*! \brief Normalized electrical parameters shared by all cells of a network. */
struct circuit_params
{
  double vdd = 1.0;
  double vth = 0.5;
  double g_on = 1.0;
  double g_off = 0.01;

  void validate() const
  {
    if ( !std::isfinite( vdd ) || !std::isfinite( vth ) || !std::isfinite( g_on ) || !std::isfinite( g_off ) )
    {
      throw std::invalid_argument( "circuit parameters must be finite" );
    }
    if ( vdd <= 0.0 )
    {
      throw std::invalid_argument( "vdd must be positive" );
    }
    if ( vth <= 0.0 || vth >= vdd )
    {
      throw std::invalid_argument( "vth must lie strictly between 0 and vdd" );
    }
    if ( g_off <= 0.0 || g_on <= g_off )
    {
      throw std::invalid_argument( "conductances must satisfy g_on > g_off > 0" );
    }
  }

  friend bool operator==( circuit_params const&, circuit_params const& ) = default;
};

/*! \brief Binary state of one resistive memory device (one memory bit). */
enum class device_state : std::uint8_t
{
  off = 0,
  on = 1
};

inline double conductance( device_state s, circuit_params const& p )
{
  return s == device_state::on ? p.g_on : p.g_off;
}

enum class inverter_kind : std::uint8_t
{
  ideal,
  sigmoid
};

/*! \brief Voltage transfer curve of the output inverter.

  The ideal inverter is a step at `vth`. The sigmoid inverter is
  `vdd / (1 + exp(gain * (v - vth) / vdd))`, which passes through `vdd/2`
  exactly at `vth` and is strictly decreasing.
*/
struct inverter_model
{
  inverter_kind kind = inverter_kind::ideal;
  double gain = 0.0;

  static inverter_model ideal() { return {}; }
  static inverter_model sigmoid( double gain )
  {
    inverter_model m{ inverter_kind::sigmoid, gain };
    m.validate();
    return m;
  }

  void validate() const
  {
    if ( kind == inverter_kind::sigmoid && !( gain > 0.0 && std::isfinite( gain ) ) )
    {
      throw std::invalid_argument( "sigmoid inverter gain must be positive and finite" );
    }
  }

  friend bool operator==( inverter_model const&, inverter_model const& ) = default;
};

namespace detail
{

inline void check_voltage( double v, circuit_params const& p )
{
  if ( !std::isfinite( v ) )
  {
    throw std::invalid_argument( "non-finite voltage" );
  }
  if ( v < 0.0 || v > p.vdd )
  {
    throw std::invalid_argument( "voltage " + std::to_string( v ) + " outside [0, vdd]" );
  }
}

} // namespace detail

/*! \brief Common-node voltage of the divider for explicit conductances.

  Every input voltage drives its device into the shared node; the reference
  device ties the node to ground.
*/
inline double node_voltage( std::span<const double> input_voltages, std::span<const double> input_conductances,
                            double reference_conductance, circuit_params const& p )
{
  if ( input_voltages.size() != input_conductances.size() )
  {
    throw std::invalid_argument( "node_voltage: voltage and device lists differ in length" );
  }
  if ( input_voltages.empty() )
  {
    throw std::invalid_argument( "node_voltage: a cell needs at least one input" );
  }
  double num = 0.0;
  double den = reference_conductance;
  for ( std::size_t i = 0; i < input_voltages.size(); ++i )
  {
    detail::check_voltage( input_voltages[i], p );
    if ( !( input_conductances[i] > 0.0 ) || !std::isfinite( input_conductances[i] ) )
    {
      throw std::invalid_argument( "node_voltage: conductances must be positive and finite" );
    }
    num += input_conductances[i] * input_voltages[i];
    den += input_conductances[i];
  }
  if ( !( reference_conductance > 0.0 ) || !std::isfinite( reference_conductance ) )
  {
    throw std::invalid_argument( "node_voltage: conductances must be positive and finite" );
  }
  // weighted average of values in [0, vdd] with a grounded extra weight
  double const v = num / den;
  return v > p.vdd ? p.vdd : v;
}

inline double node_voltage( std::span<const double> input_voltages, std::span<const device_state> input_devices,
                            device_state reference_device, circuit_params const& p )
{
  if ( input_voltages.size() != input_devices.size() )
  {
    throw std::invalid_argument( "node_voltage: voltage and device lists differ in length" );
  }
  double g[8];
  if ( input_devices.size() > 8 )
  {
    throw std::invalid_argument( "node_voltage: fan-in too large" );
  }
  for ( std::size_t i = 0; i < input_devices.size(); ++i )
  {
    g[i] = conductance( input_devices[i], p );
  }
  return node_voltage( input_voltages, std::span<const double>( g, input_devices.size() ),
                       conductance( reference_device, p ), p );
}

/*! \brief Inverter output minus `vdd/2`.

  The sign of the result is the logical output bit (positive means 1) and is
  exact even where the output itself rounds to `vdd/2`.
*/
inline double inverter_swing( double v, inverter_model const& model, circuit_params const& p )
{
  detail::check_voltage( v, p );
  double const half = 0.5 * p.vdd;
  if ( model.kind == inverter_kind::ideal )
  {
    return v < p.vth ? half : -half;
  }
  // vdd/(1+e^x) - vdd/2 == -(vdd/2) tanh(x/2)
  double const x = model.gain * ( v - p.vth ) / p.vdd;
  return -half * std::tanh( 0.5 * x );
}

inline double inverter_transfer( double v, inverter_model const& model, circuit_params const& p )
{
  double const half = 0.5 * p.vdd;
  double const out = half + inverter_swing( v, model, p );
  return out < 0.0 ? 0.0 : ( out > p.vdd ? p.vdd : out );
}

} // namespace memnet
