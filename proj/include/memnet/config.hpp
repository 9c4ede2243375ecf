#pragma once

/*!
  \file config.hpp
  \brief Flat `key = value` experiment configuration
*/

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "io.hpp"

namespace memnet
{

/*! \brief Invalid configuration or command-line usage. */
class config_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct config_key
{
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

/* every accepted key; an empty default means unset */
inline std::vector<config_key> const& config_keys()
{
  static std::vector<config_key> const keys = {
      { "task", "", "size | capacity | train | eval | perturb | faults | accumulate | classify" },
      { "output_dir", "", "directory receiving the report files" },
      { "seed", "", "master seed of every random stream" },
      { "threads", "1", "worker threads (0 = hardware count); never changes results" },
      { "dataset", "", "pattern file or PGM directory" },
      { "dataset_format", "pattern", "pattern | pgm" },
      { "pgm_threshold", "128", "pixels at or above this value become 1" },
      { "encoding", "plain", "plain | dual_rail (each bit followed by its complement)" },
      { "positive_class", "", "turn class labels into one target bit: 1 for this class" },
      { "network", "", "network file read by eval, perturb, faults and accumulate" },
      { "inputs", "", "input count (size task)" },
      { "fan_in", "6", "maximum inputs per cell" },
      { "outputs", "", "output count; defaults to 12 (size), target width (train), code_bits (classify)" },
      { "memory_bits", "", "memory budget (capacity task)" },
      { "capacity_mode", "paper", "paper | canonical" },
      { "generations", "200", "generations per stage" },
      { "population", "32", "individuals per generation" },
      { "elitism", "1", "elites copied unchanged" },
      { "crossover_rate", "0.9", "single-point crossover probability" },
      { "mutation_rate", "auto", "per-bit flip probability; auto = one expected flip per stage target" },
      { "objective", "auto", "accuracy | margin | bit_accuracy; auto = accuracy (train), bit_accuracy (classify)" },
      { "lambda", "0.1", "margin weight" },
      { "margin_scope", "final", "final | all" },
      { "vdd", "1", "supply voltage" },
      { "vth", "0.5", "inverter threshold" },
      { "g_on", "1", "ON conductance" },
      { "g_off", "0.01", "OFF conductance" },
      { "inverter", "ideal", "ideal | sigmoid" },
      { "gain", "20", "sigmoid inverter gain" },
      { "epsilons", "0,0.01,0.02,0.05,0.1", "conductance spreads (perturb)" },
      { "trials", "100", "Monte Carlo trials per spread" },
      { "fault_rates", "0,0.02,0.05,0.1", "stuck-cell fractions (faults)" },
      { "fault_kind", "high", "high | low" },
      { "fault_seeds", "30", "fault draws per rate" },
      { "gains", "2,5,10,20,50", "inverter gains (accumulate)" },
      { "code_bits", "6", "codeword width (classify)" },
      { "min_distance", "3", "minimum codeword distance (classify)" },
  };
  return keys;
}

class experiment_config
{
public:
  experiment_config() = default;

  bool known( std::string const& key ) const
  {
    auto const& k = config_keys();
    return std::any_of( k.begin(), k.end(), [&]( config_key const& c ) { return c.name == key; } );
  }

  void set( std::string const& key, std::string value )
  {
    if ( !known( key ) )
      throw config_error( "unknown configuration key '" + key + "'" );
    values_[key] = std::move( value );
  }

  /* explicit value, else default; empty means unset */
  std::string get( std::string const& key ) const
  {
    if ( auto it = values_.find( key ); it != values_.end() )
      return it->second;
    for ( auto const& c : config_keys() )
    {
      if ( c.name == key )
        return std::string( c.default_value );
    }
    throw config_error( "unknown configuration key '" + key + "'" );
  }

  bool has( std::string const& key ) const { return !get( key ).empty(); }

  std::string require( std::string const& key ) const
  {
    auto v = get( key );
    if ( v.empty() )
      throw config_error( "configuration key '" + key + "' is required for task '" + get( "task" ) + "'" );
    return v;
  }

  std::uint64_t get_uint( std::string const& key ) const
  {
    auto const v = require( key );
    auto const x = parse_uint( v );
    if ( !x )
      throw config_error( "configuration key '" + key + "' expects a non-negative integer, got '" + v + "'" );
    return *x;
  }

  double get_double( std::string const& key ) const
  {
    auto const v = require( key );
    auto const x = parse_double( v );
    if ( !x )
      throw config_error( "configuration key '" + key + "' expects a number, got '" + v + "'" );
    return *x;
  }

  std::vector<double> get_list( std::string const& key ) const
  {
    auto const v = require( key );
    std::vector<double> out;
    std::size_t start = 0;
    while ( start <= v.size() )
    {
      auto end = v.find( ',', start );
      if ( end == std::string::npos )
        end = v.size();
      auto const x = parse_double( std::string_view( v ).substr( start, end - start ) );
      if ( !x )
        throw config_error( "configuration key '" + key + "' expects a comma-separated list of numbers" );
      out.push_back( *x );
      start = end + 1;
    }
    return out;
  }

  std::string get_choice( std::string const& key, std::vector<std::string> const& choices ) const
  {
    auto const v = require( key );
    if ( std::find( choices.begin(), choices.end(), v ) == choices.end() )
    {
      std::string all;
      for ( auto const& c : choices )
        all += ( all.empty() ? "" : ", " ) + c;
      throw config_error( "configuration key '" + key + "' must be one of: " + all );
    }
    return v;
  }

  /* every set key (explicit or default) in name order, one `key = value` per line */
  std::string format() const
  {
    std::map<std::string, std::string> all;
    for ( auto const& c : config_keys() )
    {
      auto v = get( std::string( c.name ) );
      if ( !v.empty() )
        all.emplace( std::string( c.name ), std::move( v ) );
    }
    std::string out;
    for ( auto const& [k, v] : all )
      out += k + " = " + v + "\n";
    return out;
  }

private:
  std::map<std::string, std::string> values_;
};

inline std::string trim( std::string_view s )
{
  auto const b = s.find_first_not_of( " \t\r\n" );
  if ( b == std::string_view::npos )
    return {};
  auto const e = s.find_last_not_of( " \t\r\n" );
  return std::string( s.substr( b, e - b + 1 ) );
}

/*! \brief Parses `key = value` lines; `#` starts a comment line. Repeated or unknown keys are errors. */
inline experiment_config parse_config( std::string const& text )
{
  experiment_config cfg;
  std::istringstream in( text );
  std::map<std::string, std::size_t> seen;
  std::string line;
  for ( std::size_t line_no = 1; std::getline( in, line ); ++line_no )
  {
    auto const t = trim( line );
    if ( t.empty() || t.front() == '#' )
      continue;
    auto const eq = t.find( '=' );
    auto const where = "config line " + std::to_string( line_no ) + ": ";
    if ( eq == std::string::npos )
      throw config_error( where + "expected 'key = value'" );
    auto const key = trim( std::string_view( t ).substr( 0, eq ) );
    auto const value = trim( std::string_view( t ).substr( eq + 1 ) );
    if ( !cfg.known( key ) )
      throw config_error( where + "unknown configuration key '" + key + "'" );
    if ( !seen.emplace( key, line_no ).second )
      throw config_error( where + "key '" + key + "' repeats line " + std::to_string( seen[key] ) );
    cfg.set( key, value );
  }
  return cfg;
}

inline experiment_config load_config( std::filesystem::path const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw config_error( "cannot read config file " + path.string() );
  std::ostringstream ss;
  ss << in.rdbuf();
  try
  {
    return parse_config( ss.str() );
  }
  catch ( config_error const& e )
  {
    throw config_error( path.string() + ": " + e.what() );
  }
}

} // namespace memnet
