#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <memnet/circuit.hpp>

using namespace memnet;

namespace
{

/* Millman's theorem written out directly: sum(g v) / sum(g), reference at 0 V */
double millman( std::vector<double> const& v, std::vector<double> const& g, double g_ref )
{
  long double num = 0, den = g_ref;
  for ( std::size_t i = 0; i < v.size(); ++i )
  {
    num += static_cast<long double>( g[i] ) * v[i];
    den += g[i];
  }
  return static_cast<double>( num / den );
}

} // namespace

TEST( circuit_params, defaults_are_valid )
{
  circuit_params p;
  EXPECT_NO_THROW( p.validate() );
  EXPECT_EQ( p.vdd, 1.0 );
  EXPECT_EQ( p.vth, 0.5 );
  EXPECT_EQ( p.g_on, 1.0 );
  EXPECT_EQ( p.g_off, p.g_on / 100 );
}

TEST( circuit_params, rejects_invalid )
{
  EXPECT_THROW( ( circuit_params{ 0.0, 0.5, 1.0, 0.01 }.validate() ), std::invalid_argument );
  EXPECT_THROW( ( circuit_params{ 1.0, 1.0, 1.0, 0.01 }.validate() ), std::invalid_argument );
  EXPECT_THROW( ( circuit_params{ 1.0, 0.0, 1.0, 0.01 }.validate() ), std::invalid_argument );
  EXPECT_THROW( ( circuit_params{ 1.0, 0.5, 1.0, 0.0 }.validate() ), std::invalid_argument );
  EXPECT_THROW( ( circuit_params{ 1.0, 0.5, 0.01, 0.01 }.validate() ), std::invalid_argument );
  EXPECT_THROW( ( circuit_params{ 1.0, 0.5, std::nan( "" ), 0.01 }.validate() ), std::invalid_argument );
}

TEST( node_voltage, grounded_inputs_give_zero )
{
  circuit_params p;
  std::vector<double> v{ 0, 0, 0 };
  std::vector<device_state> d{ device_state::on, device_state::off, device_state::on };
  EXPECT_EQ( node_voltage( v, d, device_state::on, p ), 0.0 );
}

TEST( node_voltage, symmetric_divider )
{
  circuit_params p;
  std::vector<double> v{ 1.0 };
  std::vector<device_state> d{ device_state::on };
  EXPECT_EQ( node_voltage( v, d, device_state::on, p ), 0.5 );
}

TEST( node_voltage, three_inputs_hand_nodal )
{
  circuit_params p;
  std::vector<double> v{ 1.0, 0.0, 1.0 };
  std::vector<device_state> d( 3, device_state::on );
  // (1 + 1) / (1 + 1 + 1 + 1)
  EXPECT_EQ( node_voltage( v, d, device_state::on, p ), 0.5 );
}

TEST( node_voltage, off_devices_still_conduct )
{
  circuit_params p;
  std::vector<double> v{ 1.0 };
  std::vector<device_state> d{ device_state::off };
  EXPECT_DOUBLE_EQ( node_voltage( v, d, device_state::on, p ), 0.01 / 1.01 );
  EXPECT_DOUBLE_EQ( node_voltage( v, std::vector<device_state>{ device_state::on }, device_state::off, p ), 1.0 / 1.01 );
}

TEST( node_voltage, errors )
{
  circuit_params p;
  std::vector<double> two{ 0.0, 1.0 };
  std::vector<device_state> one{ device_state::on };
  EXPECT_THROW( node_voltage( two, one, device_state::on, p ), std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{}, std::vector<device_state>{}, device_state::on, p ), std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{ 1.5 }, one, device_state::on, p ), std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{ -0.1 }, one, device_state::on, p ), std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{ std::nan( "" ) }, one, device_state::on, p ), std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{ std::numeric_limits<double>::infinity() }, one, device_state::on, p ),
                std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{ 1.0 }, std::vector<double>{ 0.0 }, 1.0, p ), std::invalid_argument );
  EXPECT_THROW( node_voltage( std::vector<double>{ 1.0 }, std::vector<double>{ 1.0 }, -1.0, p ), std::invalid_argument );
}

TEST( node_voltage, matches_millman_on_random_cells )
{
  std::mt19937_64 rng( 1 );
  std::uniform_real_distribution<double> u( 0.0, 1.0 );
  std::uniform_real_distribution<double> g( 0.005, 2.0 );
  circuit_params p;
  for ( int trial = 0; trial < 5000; ++trial )
  {
    std::size_t const n = 1 + trial % 6;
    std::vector<double> v( n ), gs( n );
    for ( std::size_t i = 0; i < n; ++i )
    {
      v[i] = u( rng );
      gs[i] = g( rng );
    }
    double const gr = g( rng );
    double const x = node_voltage( v, gs, gr, p );
    EXPECT_NEAR( x, millman( v, gs, gr ), 1e-15 );
    EXPECT_GE( x, 0.0 );
    EXPECT_LE( x, p.vdd );
  }
}

TEST( node_voltage, monotone_in_each_input )
{
  circuit_params p;
  for ( std::uint32_t states = 0; states < ( 1u << 7 ); ++states )
  {
    std::vector<device_state> d( 6 );
    for ( std::size_t i = 0; i < 6; ++i )
      d[i] = ( states >> i ) & 1u ? device_state::on : device_state::off;
    auto const ref = ( states >> 6 ) & 1u ? device_state::on : device_state::off;
    for ( std::uint32_t pattern = 0; pattern < 64; ++pattern )
    {
      std::vector<double> v( 6 );
      for ( std::size_t i = 0; i < 6; ++i )
        v[i] = ( pattern >> i ) & 1u ? 1.0 : 0.0;
      double const base = node_voltage( v, d, ref, p );
      for ( std::size_t i = 0; i < 6; ++i )
      {
        if ( v[i] != 0.0 )
          continue;
        auto w = v;
        w[i] = 1.0;
        EXPECT_GE( node_voltage( w, d, ref, p ), base );
      }
    }
  }
}

TEST( inverter, ideal_transfer )
{
  circuit_params p;
  EXPECT_EQ( inverter_transfer( 0.3, inverter_model::ideal(), p ), 1.0 );
  EXPECT_EQ( inverter_transfer( 0.7, inverter_model::ideal(), p ), 0.0 );
  EXPECT_EQ( inverter_transfer( 0.0, inverter_model::ideal(), p ), 1.0 );
  EXPECT_EQ( inverter_transfer( 1.0, inverter_model::ideal(), p ), 0.0 );
}

TEST( inverter, sigmoid_midpoint_and_formula )
{
  circuit_params p;
  for ( double gain : { 0.5, 2.0, 20.0, 1e6 } )
  {
    auto const m = inverter_model::sigmoid( gain );
    EXPECT_EQ( inverter_transfer( p.vth, m, p ), 0.5 * p.vdd );
    EXPECT_EQ( inverter_swing( p.vth, m, p ), 0.0 );
    for ( double v : { 0.0, 0.1, 0.45, 0.55, 0.9, 1.0 } )
    {
      double const expect = p.vdd / ( 1.0 + std::exp( gain * ( v - p.vth ) / p.vdd ) );
      EXPECT_NEAR( inverter_transfer( v, m, p ), expect, 1e-15 );
    }
  }
}

TEST( inverter, sigmoid_strictly_decreasing )
{
  circuit_params p;
  auto const m = inverter_model::sigmoid( 5.0 );
  double prev = inverter_transfer( 0.0, m, p );
  for ( int i = 1; i <= 1000; ++i )
  {
    double const cur = inverter_transfer( i / 1000.0, m, p );
    EXPECT_LT( cur, prev );
    prev = cur;
  }
}

TEST( inverter, swing_sign_is_exact_near_threshold )
{
  circuit_params p;
  auto const m = inverter_model::sigmoid( 1e6 );
  double const below = std::nextafter( p.vth, 0.0 );
  double const above = std::nextafter( p.vth, 1.0 );
  EXPECT_GT( inverter_swing( below, m, p ), 0.0 );
  EXPECT_LT( inverter_swing( above, m, p ), 0.0 );
  EXPECT_GT( inverter_swing( below, inverter_model::ideal(), p ), 0.0 );
  EXPECT_LT( inverter_swing( p.vth, inverter_model::ideal(), p ), 0.0 );
}

TEST( inverter, rejects_bad_input )
{
  circuit_params p;
  EXPECT_THROW( inverter_transfer( 1.01, inverter_model::ideal(), p ), std::invalid_argument );
  EXPECT_THROW( inverter_transfer( -0.01, inverter_model::ideal(), p ), std::invalid_argument );
  EXPECT_THROW( inverter_model::sigmoid( 0.0 ), std::invalid_argument );
  EXPECT_THROW( inverter_model::sigmoid( -1.0 ), std::invalid_argument );
}
