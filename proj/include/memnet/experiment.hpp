#pragma once

/*!
  \file experiment.hpp
  \brief Config-driven experiments writing CSV reports and a text summary
*/

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bank.hpp"
#include "config.hpp"
#include "io.hpp"
#include "robustness.hpp"
#include "sizing.hpp"
#include "synthetic.hpp"
#include "trainer.hpp"

namespace memnet
{

struct experiment_report
{
  std::filesystem::path output_dir;
  /* written files in order, relative to output_dir */
  std::vector<std::string> files;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;
};

namespace detail
{

class report_writer
{
public:
  explicit report_writer( std::filesystem::path dir ) { report.output_dir = std::move( dir ); }

  void write( std::string const& name, std::string const& content )
  {
    std::ofstream out( report.output_dir / name, std::ios::binary );
    out << content;
    if ( !out )
      throw data_error( "cannot write " + ( report.output_dir / name ).string() );
    report.files.push_back( name );
  }

  experiment_report report;
};

inline std::size_t size_value( experiment_config const& cfg, std::string const& key )
{
  auto const v = cfg.get_uint( key );
  if ( v > ( std::uint64_t{ 1 } << 32 ) )
    throw config_error( "configuration key '" + key + "' is too large" );
  return static_cast<std::size_t>( v );
}

inline circuit_params config_params( experiment_config const& cfg )
{
  circuit_params p;
  p.vdd = cfg.get_double( "vdd" );
  p.vth = cfg.get_double( "vth" );
  p.g_on = cfg.get_double( "g_on" );
  p.g_off = cfg.get_double( "g_off" );
  try
  {
    p.validate();
  }
  catch ( std::invalid_argument const& e )
  {
    throw config_error( e.what() );
  }
  return p;
}

inline inverter_model config_inverter( experiment_config const& cfg )
{
  inverter_model m = cfg.get_choice( "inverter", { "ideal", "sigmoid" } ) == "ideal" ? inverter_model::ideal()
                                                                                      : inverter_model::sigmoid( cfg.get_double( "gain" ) );
  try
  {
    m.validate();
  }
  catch ( std::invalid_argument const& e )
  {
    throw config_error( e.what() );
  }
  return m;
}

inline dataset config_dataset( experiment_config const& cfg )
{
  std::filesystem::path const path = cfg.require( "dataset" );
  dataset d = cfg.get_choice( "dataset_format", { "pattern", "pgm" } ) == "pattern"
                  ? load_pattern_text( path )
                  : load_pgm_directory( path, static_cast<unsigned>( std::min<std::uint64_t>( cfg.get_uint( "pgm_threshold" ), 256 ) ) );
  if ( cfg.get_choice( "encoding", { "plain", "dual_rail" } ) == "dual_rail" )
  {
    for ( auto& x : d.inputs )
      x = dual_rail( x );
  }
  if ( cfg.has( "positive_class" ) )
  {
    auto const name = cfg.get( "positive_class" );
    auto const it = std::find( d.class_names.begin(), d.class_names.end(), name );
    if ( it == d.class_names.end() )
      throw data_error( "positive_class '" + name + "' does not occur in the dataset" );
    auto const pos = static_cast<std::size_t>( it - d.class_names.begin() );
    d.targets.clear();
    for ( auto c : d.classes )
      d.targets.push_back( { static_cast<std::uint8_t>( c == pos ? 1 : 0 ) } );
  }
  return d;
}

inline memory_network config_network( experiment_config const& cfg, dataset const& data )
{
  auto net = load_network( cfg.require( "network" ) );
  if ( data.input_width() != net.topology().n_inputs )
    throw data_error( "dataset has " + std::to_string( data.input_width() ) + " input bits, network expects " +
                      std::to_string( net.topology().n_inputs ) );
  return net;
}

inline void require_targets( dataset const& data, memory_network const& net )
{
  if ( !data.has_targets() )
    throw data_error( "dataset labels are not bit targets; set positive_class or use bit-string labels" );
  if ( data.target_width() != net.topology().n_outputs )
    throw data_error( "dataset has " + std::to_string( data.target_width() ) + " target bits, network produces " +
                      std::to_string( net.topology().n_outputs ) );
}

inline tree_topology config_topology( experiment_config const& cfg, std::size_t n_inputs, std::size_t n_outputs )
{
  try
  {
    return build_tree_topology( n_inputs, size_value( cfg, "fan_in" ), n_outputs );
  }
  catch ( std::invalid_argument const& e )
  {
    throw config_error( std::string( "infeasible topology: " ) + e.what() );
  }
}

inline train_schedule config_schedule( experiment_config const& cfg, tree_topology const& topo, objective obj )
{
  auto s = train_schedule::layerwise( topo, cfg.get_uint( "seed" ), size_value( cfg, "generations" ),
                                      size_value( cfg, "population" ), obj );
  for ( auto& st : s.stages )
  {
    st.elitism = size_value( cfg, "elitism" );
    st.crossover_rate = cfg.get_double( "crossover_rate" );
    if ( cfg.get( "mutation_rate" ) != "auto" )
      st.mutation_rate = cfg.get_double( "mutation_rate" );
  }
  try
  {
    s.validate( topo );
  }
  catch ( std::invalid_argument const& e )
  {
    throw config_error( e.what() );
  }
  return s;
}

inline objective config_objective( experiment_config const& cfg, std::string const& fallback )
{
  auto kind = cfg.get_choice( "objective", { "auto", "accuracy", "margin", "bit_accuracy" } );
  if ( kind == "auto" )
    kind = fallback;
  auto const scope = cfg.get_choice( "margin_scope", { "final", "all" } ) == "final" ? margin_scope::final_layer
                                                                                     : margin_scope::all_cells;
  if ( kind == "accuracy" )
    return objective::accuracy();
  if ( kind == "bit_accuracy" )
    return objective::bit_accuracy();
  return objective::accuracy_plus_margin( cfg.get_double( "lambda" ), scope );
}

inline std::size_t config_threads( experiment_config const& cfg ) { return size_value( cfg, "threads" ); }

inline std::string history_csv( std::vector<generation_record> const& history )
{
  std::string out = "stage,generation,best_fitness\n";
  for ( auto const& h : history )
    out += std::to_string( h.stage ) + "," + std::to_string( h.generation ) + "," + format_double( h.best_fitness ) + "\n";
  return out;
}

inline std::string summary_text( std::vector<std::pair<std::string, std::string>> const& fields )
{
  std::string out;
  for ( auto const& [k, v] : fields )
    out += k + ": " + v + "\n";
  return out;
}

inline void run_size( experiment_config& cfg, report_writer& w )
{
  if ( !cfg.has( "outputs" ) )
    cfg.set( "outputs", std::to_string( canonical_outputs ) );
  auto const n = size_value( cfg, "inputs" );
  if ( n > ( std::size_t{ 1 } << 26 ) )
    throw config_error( "size task supports at most 2^26 inputs; use the capacity task beyond that" );
  auto const r = size_network( config_topology( cfg, n, size_value( cfg, "outputs" ) ) );
  w.write( "sizing.csv", "n_inputs,layers,inverters,memory_bits,resolution_denominator\n" + std::to_string( r.n_inputs ) +
                             "," + std::to_string( r.n_layers ) + "," + std::to_string( r.inverters ) + "," +
                             std::to_string( r.memory_bits ) + "," + std::to_string( r.resolution.den ) + "\n" );
  w.write( "summary.txt", summary_text( { { "task", "size" },
                                          { "n_inputs", std::to_string( r.n_inputs ) },
                                          { "layers", std::to_string( r.n_layers ) },
                                          { "inverters", std::to_string( r.inverters ) },
                                          { "memory_bits", std::to_string( r.memory_bits ) },
                                          { "resolution", to_string( r.resolution ) } } ) );
}

inline void run_capacity( experiment_config const& cfg, report_writer& w )
{
  auto const bits = cfg.get_uint( "memory_bits" );
  auto const mode_name = cfg.get_choice( "capacity_mode", { "paper", "canonical" } );
  capacity_report r;
  try
  {
    r = extrapolate_capacity( bits, mode_name == "paper" ? capacity_mode::paper_ratio : capacity_mode::canonical );
  }
  catch ( std::logic_error const& e )
  {
    throw config_error( e.what() );
  }
  catch ( std::overflow_error const& e )
  {
    throw config_error( e.what() );
  }
  w.write( "capacity.csv", "memory_bits,mode,max_inputs,layers,resolution_denominator\n" + std::to_string( bits ) + "," +
                               mode_name + "," + std::to_string( r.max_inputs ) + "," + std::to_string( r.layers ) + "," +
                               std::to_string( r.resolution.den ) + "\n" );
  std::vector<std::pair<std::string, std::string>> fields = { { "task", "capacity" },
                                                              { "memory_bits", std::to_string( bits ) },
                                                              { "mode", mode_name },
                                                              { "max_inputs", std::to_string( r.max_inputs ) },
                                                              { "layers", std::to_string( r.layers ) },
                                                              { "resolution", to_string( r.resolution ) } };
  if ( r.layers > 1 )
  {
    auto const below = canonical_inputs( r.layers - 1 );
    auto note = "the canonical fan-in 6 tree with " + std::to_string( r.layers - 1 ) + " layers has " +
                std::to_string( below ) + " inputs, so " + std::to_string( r.max_inputs ) + " inputs need " +
                std::to_string( r.layers ) + " layers";
    if ( r.layers == 11 )
      note += " (not 10)";
    fields.emplace_back( "note", note );
    w.report.notes.push_back( note );
  }
  w.write( "summary.txt", summary_text( fields ) );
}

inline void run_train( experiment_config& cfg, report_writer& w )
{
  auto const data = config_dataset( cfg );
  if ( !data.has_targets() )
    throw data_error( "dataset labels are not bit targets; set positive_class or use bit-string labels" );
  if ( !cfg.has( "outputs" ) )
    cfg.set( "outputs", std::to_string( data.target_width() ) );
  if ( size_value( cfg, "outputs" ) != data.target_width() )
    throw data_error( "dataset has " + std::to_string( data.target_width() ) + " target bits, outputs is " + cfg.get( "outputs" ) );
  if ( cfg.has( "inputs" ) && size_value( cfg, "inputs" ) != data.input_width() )
    throw data_error( "dataset has " + std::to_string( data.input_width() ) + " input bits, inputs is " + cfg.get( "inputs" ) );
  auto const topo = config_topology( cfg, data.input_width(), data.target_width() );
  auto const obj = config_objective( cfg, "accuracy" );
  auto const sched = config_schedule( cfg, topo, obj );
  auto const r = train( topo, data, sched, config_params( cfg ), config_inverter( cfg ), config_threads( cfg ) );

  w.write( "history.csv", history_csv( r.history ) );
  save_network( r.network, w.report.output_dir / "network.net" );
  w.report.files.push_back( "network.net" );
  auto const acc = fitness( r.network, data, objective::accuracy() );
  w.write( "summary.txt", summary_text( { { "task", "train" },
                                          { "samples", std::to_string( data.size() ) },
                                          { "inputs", std::to_string( topo.n_inputs ) },
                                          { "outputs", std::to_string( topo.n_outputs ) },
                                          { "layers", std::to_string( topo.layers.size() ) },
                                          { "memory_bits", std::to_string( topo.num_devices() ) },
                                          { "best_fitness", format_double( r.best_fitness ) },
                                          { "accuracy", format_double( acc ) },
                                          { "generations_run", std::to_string( r.history.size() ) } } ) );
}

inline void run_eval( experiment_config const& cfg, report_writer& w )
{
  auto const data = config_dataset( cfg );
  auto const net = config_network( cfg, data );
  if ( data.has_targets() )
    require_targets( data, net );
  std::string csv = data.has_targets() ? "sample,output,target,correct\n" : "sample,output\n";
  std::size_t hits = 0;
  for ( std::size_t s = 0; s < data.size(); ++s )
  {
    auto const out = network_forward( net, data.inputs[s], eval_mode::digital );
    csv += std::to_string( s ) + "," + to_string( out );
    if ( data.has_targets() )
    {
      bool const ok = out == data.targets[s];
      hits += ok ? 1u : 0u;
      csv += "," + to_string( data.targets[s] ) + "," + ( ok ? "1" : "0" );
    }
    csv += "\n";
  }
  w.write( "predictions.csv", csv );
  std::vector<std::pair<std::string, std::string>> fields = { { "task", "eval" }, { "samples", std::to_string( data.size() ) } };
  if ( data.has_targets() )
    fields.emplace_back( "accuracy", format_double( static_cast<double>( hits ) / static_cast<double>( data.size() ) ) );
  w.write( "summary.txt", summary_text( fields ) );
}

inline void run_perturb( experiment_config const& cfg, report_writer& w )
{
  auto const data = config_dataset( cfg );
  auto const net = config_network( cfg, data );
  require_targets( data, net );
  auto const eps = cfg.get_list( "epsilons" );
  for ( double e : eps )
  {
    if ( !( e >= 0.0 && e < 1.0 ) )
      throw config_error( "epsilons must lie in [0, 1)" );
  }
  auto const rows = sensitivity_sweep( net, data, eps, size_value( cfg, "trials" ), cfg.get_uint( "seed" ), config_threads( cfg ) );
  std::string csv = "epsilon,flip_rate,accuracy\n";
  for ( auto const& r : rows )
    csv += format_double( r.epsilon ) + "," + format_double( r.flip_rate ) + "," + format_double( r.accuracy ) + "\n";
  w.write( "sweep.csv", csv );
  w.write( "summary.txt", summary_text( { { "task", "perturb" },
                                          { "samples", std::to_string( data.size() ) },
                                          { "trials", cfg.get( "trials" ) },
                                          { "max_flip_rate", format_double( rows.back().flip_rate ) } } ) );
}

inline stuck_at config_fault_kind( experiment_config const& cfg )
{
  return cfg.get_choice( "fault_kind", { "high", "low" } ) == "high" ? stuck_at::high : stuck_at::low;
}

inline std::vector<double> config_fault_rates( experiment_config const& cfg )
{
  auto const rates = cfg.get_list( "fault_rates" );
  for ( double r : rates )
  {
    if ( !( r >= 0.0 && r <= 1.0 ) )
      throw config_error( "fault_rates must lie in [0, 1]" );
  }
  return rates;
}

inline void run_faults( experiment_config const& cfg, report_writer& w )
{
  auto const data = config_dataset( cfg );
  auto const net = config_network( cfg, data );
  require_targets( data, net );
  auto const rows = fault_sweep( net, data, config_fault_rates( cfg ), config_fault_kind( cfg ), size_value( cfg, "fault_seeds" ),
                                 cfg.get_uint( "seed" ), config_threads( cfg ) );
  std::string csv = "fault_rate,mean_accuracy\n";
  for ( auto const& r : rows )
    csv += format_double( r.fault_rate ) + "," + format_double( r.mean_accuracy ) + "\n";
  w.write( "faults.csv", csv );
  w.write( "summary.txt", summary_text( { { "task", "faults" },
                                          { "samples", std::to_string( data.size() ) },
                                          { "fault_kind", cfg.get( "fault_kind" ) },
                                          { "fault_seeds", cfg.get( "fault_seeds" ) } } ) );
}

inline void run_accumulate( experiment_config const& cfg, report_writer& w )
{
  auto const data = config_dataset( cfg );
  auto const net = config_network( cfg, data );
  auto const gains = cfg.get_list( "gains" );
  for ( double g : gains )
  {
    if ( !( g > 0.0 ) )
      throw config_error( "gains must be positive" );
  }
  auto const rows = accumulation_profile( net, data, gains );
  std::string csv = "gain,layer,mismatch_rate\n";
  std::vector<std::pair<std::string, std::string>> fields = { { "task", "accumulate" },
                                                              { "samples", std::to_string( data.size() ) } };
  for ( auto const& r : rows )
  {
    for ( std::size_t l = 0; l < r.layer_mismatch.size(); ++l )
      csv += format_double( r.gain ) + "," + std::to_string( l ) + "," + format_double( r.layer_mismatch[l] ) + "\n";
    fields.emplace_back( "overall_mismatch_at_gain_" + format_double( r.gain ), format_double( r.overall_mismatch ) );
  }
  w.write( "accumulation.csv", csv );
  w.write( "summary.txt", summary_text( fields ) );
}

inline void run_classify( experiment_config& cfg, report_writer& w )
{
  auto const data = config_dataset( cfg );
  if ( !data.has_classes() )
    throw data_error( "classify needs class labels" );
  if ( data.class_names.size() > max_bank_classes )
    throw data_error( "classify supports at most " + std::to_string( max_bank_classes ) + " classes" );
  if ( !cfg.has( "outputs" ) )
    cfg.set( "outputs", cfg.get( "code_bits" ) );
  auto const bits = size_value( cfg, "code_bits" );
  if ( size_value( cfg, "outputs" ) != bits )
    throw config_error( "outputs must equal code_bits for classify" );
  auto const seed = cfg.get_uint( "seed" );
  auto const n_classes = data.class_names.size();

  codebook cb;
  try
  {
    cb = make_codewords( n_classes, bits, size_value( cfg, "min_distance" ), seed );
  }
  catch ( std::exception const& e )
  {
    throw config_error( e.what() );
  }
  auto const topo = config_topology( cfg, data.input_width(), bits );
  auto const sched = config_schedule( cfg, topo, config_objective( cfg, "bit_accuracy" ) );
  auto const bank = build_bank( topo, n_classes, cb, config_params( cfg ), config_inverter( cfg ) );
  auto const trained = train_bank( bank, data, sched, config_threads( cfg ) );
  for ( auto const& m : trained.warnings )
    w.report.warnings.push_back( m );

  std::vector<std::vector<std::size_t>> confusion( n_classes, std::vector<std::size_t>( n_classes, 0 ) );
  std::size_t hits = 0;
  for ( std::size_t s = 0; s < data.size(); ++s )
  {
    auto const c = classify( trained.bank, data.inputs[s] ).winner;
    ++confusion[data.classes[s]][c];
    hits += c == data.classes[s] ? 1u : 0u;
  }
  std::string csv = "actual,predicted,count\n";
  for ( std::size_t a = 0; a < n_classes; ++a )
  {
    for ( std::size_t p = 0; p < n_classes; ++p )
      csv += data.class_names[a] + "," + data.class_names[p] + "," + std::to_string( confusion[a][p] ) + "\n";
  }
  w.write( "confusion.csv", csv );

  std::string hist = "class,stage,generation,best_fitness\n";
  for ( std::size_t c = 0; c < n_classes; ++c )
  {
    for ( auto const& h : trained.histories[c] )
      hist += data.class_names[c] + "," + std::to_string( h.stage ) + "," + std::to_string( h.generation ) + "," +
              format_double( h.best_fitness ) + "\n";
  }
  w.write( "history.csv", hist );

  std::string words;
  for ( std::size_t c = 0; c < n_classes; ++c )
  {
    words += data.class_names[c] + " " + to_string( cb.codewords[c] ) + "\n";
    save_network( trained.bank.networks[c], w.report.output_dir / ( "bank_" + std::to_string( c ) + ".net" ) );
    w.report.files.push_back( "bank_" + std::to_string( c ) + ".net" );
  }
  w.write( "codebook.txt", words );
  std::vector<std::pair<std::string, std::string>> fields = {
      { "task", "classify" },
      { "samples", std::to_string( data.size() ) },
      { "classes", std::to_string( n_classes ) },
      { "accuracy", format_double( static_cast<double>( hits ) / static_cast<double>( data.size() ) ) } };
  for ( auto const& m : trained.warnings )
    fields.emplace_back( "warning", m );
  w.write( "summary.txt", summary_text( fields ) );
}

} // namespace detail

inline std::vector<std::string> const& experiment_tasks()
{
  static std::vector<std::string> const tasks = { "size", "capacity", "train", "eval", "perturb", "faults", "accumulate", "classify" };
  return tasks;
}

/*! \brief Runs the configured task and writes its reports into `output_dir`.

  The merged configuration, with per-task defaults filled in, is echoed to
  `config.txt` so the run can be repeated from that file alone. Throws
  `config_error` for invalid settings and `data_error` for unusable inputs.
*/
inline experiment_report run_experiment( experiment_config cfg )
{
  auto const task = cfg.get_choice( "task", experiment_tasks() );
  std::filesystem::path const dir = cfg.require( "output_dir" );
  bool const seeded = task == "train" || task == "perturb" || task == "faults" || task == "classify";
  if ( seeded )
    cfg.get_uint( "seed" );
  std::error_code ec;
  std::filesystem::create_directories( dir, ec );
  if ( ec || !std::filesystem::is_directory( dir ) )
    throw data_error( "cannot create output directory " + dir.string() );

  detail::report_writer w( dir );
  if ( task == "size" )
    detail::run_size( cfg, w );
  else if ( task == "capacity" )
    detail::run_capacity( cfg, w );
  else if ( task == "train" )
    detail::run_train( cfg, w );
  else if ( task == "eval" )
    detail::run_eval( cfg, w );
  else if ( task == "perturb" )
    detail::run_perturb( cfg, w );
  else if ( task == "faults" )
    detail::run_faults( cfg, w );
  else if ( task == "accumulate" )
    detail::run_accumulate( cfg, w );
  else
    detail::run_classify( cfg, w );
  w.write( "config.txt", cfg.format() );
  return w.report;
}

} // namespace memnet
