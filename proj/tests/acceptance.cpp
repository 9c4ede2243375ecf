// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance --cli <memnet executable> --work <scratch directory>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <memnet/bank.hpp>
#include <memnet/robustness.hpp>
#include <memnet/sizing.hpp>
#include <memnet/synthetic.hpp>
#include <memnet/trainer.hpp>

using namespace memnet;
namespace fs = std::filesystem;

namespace
{

using clock_type = std::chrono::steady_clock;

double seconds_since( clock_type::time_point t0 )
{
  return std::chrono::duration<double>( clock_type::now() - t0 ).count();
}

int failures = 0;

void report( int id, std::string const& name, bool ok, std::string const& detail )
{
  std::cout << ( ok ? "PASS" : "FAIL" ) << "  #" << id << " " << name << ": " << detail << std::endl;
  if ( !ok )
    ++failures;
}

std::string read_text( fs::path const& p )
{
  std::ifstream in( p, std::ios::binary );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/* 36-input, 2-layer, single-output fixture shared by #5, #6 and #7 */
constexpr std::uint64_t fixture_seed = 1;
constexpr std::size_t fixture_generations = 200;

struct fixture
{
  planted_task task;
  train_result trained;
  double accuracy = 0.0;
};

fixture train_fixture( std::size_t threads )
{
  auto const topo = build_tree_topology( 36, 6, 1 );
  fixture f{ make_planted_task( topo, 200, fixture_seed ), {}, 0.0 };
  auto const schedule = train_schedule::layerwise( topo, fixture_seed, fixture_generations, 64,
                                                   objective::accuracy_plus_margin( 0.1, margin_scope::all_cells ) );
  f.trained = train( topo, f.task.data, schedule, {}, {}, threads );
  f.accuracy = fitness( f.trained.network, f.task.data, objective::accuracy() );
  return f;
}

struct bank_fixture
{
  dataset data;
  bank_training trained;
  double accuracy = 0.0;
};

bank_fixture train_bank_fixture()
{
  bank_fixture b;
  b.data = make_prototype_task( 4, 18, 25, 0.05, fixture_seed );
  auto const templ = build_tree_topology( 36, 6, 6 );
  auto const bank = build_bank( templ, 4, make_codewords( 4, 6, 3, fixture_seed ) );
  auto const schedule = train_schedule::layerwise( templ, fixture_seed, fixture_generations, 32, objective::bit_accuracy() );
  b.trained = train_bank( bank, b.data, schedule );
  b.accuracy = bank_accuracy( b.trained.bank, b.data );
  return b;
}

void criterion_sizing()
{
  auto const r = size_network( 1296, 6, 12 );
  bool const ok = r.inverters == 264 && r.memory_bits == 1812 && r.n_layers == 3 && r.resolution == rational{ 1, 1296 };
  report( 1, "sizing (1296, 6, 12)", ok,
          "inverters=" + std::to_string( r.inverters ) + " bits=" + std::to_string( r.memory_bits ) +
              " layers=" + std::to_string( r.n_layers ) + " resolution=" + to_string( r.resolution ) +
              " (expect 264, 1812, 3, 1/1296, exact)" );
}

void criterion_capacity( fs::path const& cli, fs::path const& work )
{
  auto const r = extrapolate_capacity( std::uint64_t{ 1 } << 30, capacity_mode::paper_ratio );
  auto const layers = layers_required( r.max_inputs );
  auto const dir = work / "capacity_note";
  auto const log = work / "capacity_note.log";
  auto const cmd = "\"" + cli.string() + "\" capacity --memory_bits 1073741824 --output_dir \"" + dir.string() +
                   "\" > \"" + log.string() + "\" 2>&1";
  int const rc = std::system( cmd.c_str() );
  auto const out = read_text( log );
  bool const note = out.find( "note:" ) != std::string::npos && out.find( "not 10" ) != std::string::npos;
  bool const ok = r.max_inputs == 766958445 && r.resolution == rational{ 1, 766958445 } && layers == 11 && rc == 0 && note;
  report( 2, "capacity 2^30 bits", ok,
          "max_inputs=" + std::to_string( r.max_inputs ) + " layers=" + std::to_string( layers ) +
              " cli_note=" + ( note ? "yes" : "no" ) + " (expect 766958445, 11, divergence note printed)" );
}

void criterion_closed_forms()
{
  bool ok = true;
  std::string detail;
  std::uint64_t n = 36;
  for ( std::uint64_t l = 1; l <= 6; ++l, n *= 6 )
  {
    auto const r = size_network( n, 6, 12 );
    bool const divisible = ( n + 24 ) % 5 == 0 && ( 7 * n - 12 ) % 5 == 0;
    auto const bits = ( 7 * n - 12 ) / 5;
    auto const back = extrapolate_capacity( bits, capacity_mode::canonical );
    bool const row = divisible && r.n_layers == l && r.inverters == ( n + 24 ) / 5 && r.memory_bits == bits &&
                     canonical_inputs( l ) == n && back.max_inputs == n && back.layers == l;
    ok = ok && row;
    detail += "L" + std::to_string( l ) + ( row ? "ok " : "BAD " );
  }
  report( 3, "closed forms L=1..6", ok, detail + "(exact integer equality)" );
}

struct enumerable_task
{
  std::string name;
  tree_topology topology;
  dataset data;
  objective obj;
};

std::vector<enumerable_task> enumerable_tasks()
{
  std::vector<enumerable_task> tasks;
  auto const table = [&]( std::string name, std::size_t n, std::size_t fan_in, std::function<bool( bit_vector const& )> fn,
                          objective obj = objective::accuracy() ) {
    tasks.push_back( { std::move( name ), build_tree_topology( n, fan_in, 1 ),
                       truth_table_task( n, [fn]( bit_vector const& x ) { return bit_vector{ std::uint8_t( fn( x ) ) }; } ),
                       obj } );
  };
  auto const ones = []( bit_vector const& x ) {
    int c = 0;
    for ( auto b : x )
      c += b;
    return c;
  };
  table( "not_x0", 2, 2, []( bit_vector const& x ) { return !x[0]; } );
  table( "xor", 2, 2, []( bit_vector const& x ) { return ( x[0] ^ x[1] ) != 0; } );
  table( "not_at_least_4_of_6", 6, 6, [ones]( bit_vector const& x ) { return !( ones( x ) >= 4 ); } );
  table( "nand3", 3, 3, []( bit_vector const& x ) { return !( x[0] && x[1] && x[2] ); } );
  table( "nor_x0_x1_of_4", 4, 4, []( bit_vector const& x ) { return !( x[0] || x[1] ); } );
  table( "and_or_2_2", 4, 2, []( bit_vector const& x ) { return ( x[0] && x[1] ) || ( x[2] && x[3] ); } );
  table( "parity4", 4, 2, []( bit_vector const& x ) { return ( x[0] ^ x[1] ^ x[2] ^ x[3] ) != 0; } );
  table( "majority3_padded", 3, 2, [ones]( bit_vector const& x ) { return ones( x ) >= 2; } );
  table( "nand3_margin", 3, 3, []( bit_vector const& x ) { return !( x[0] && x[1] && x[2] ); },
         objective::accuracy_plus_margin( 0.1 ) );
  auto const planted = [&]( std::string name, std::size_t n, std::size_t fan_in, std::size_t outs, std::size_t samples,
                            std::uint64_t seed ) {
    auto const t = build_tree_topology( n, fan_in, outs );
    tasks.push_back( { std::move( name ), t, make_planted_task( t, samples, seed, {}, 0.0 ).data, objective::accuracy() } );
  };
  planted( "planted_6_3_1", 6, 3, 1, 64, 5 );
  planted( "planted_9_3_1", 9, 3, 1, 128, 6 );
  planted( "planted_5_2_2", 5, 2, 2, 32, 7 );
  return tasks;
}

void criterion_oracle()
{
  constexpr std::size_t seeds = 100;
  constexpr std::size_t required = 95;
  constexpr double tolerance = 1e-12;
  constexpr double budget_seconds = 300.0;
  auto const t0 = clock_type::now();
  auto const tasks = enumerable_tasks();
  bool ok = tasks.size() >= 10;
  std::string detail;
  double xor_best = -1.0;
  for ( auto const& t : tasks )
  {
    ok = ok && t.topology.num_devices() <= 16;
    auto const best = brute_force_best( t.topology, t.data, t.obj );
    if ( t.name == "xor" )
      xor_best = best.best_score;
    auto const stages = t.topology.layers.size() + 1;
    auto const per_stage = ( 500 + stages - 1 ) / stages;
    std::size_t hits = 0;
    for ( std::uint64_t seed = 0; seed < seeds; ++seed )
    {
      auto const r = train( t.topology, t.data, train_schedule::layerwise( t.topology, seed, per_stage, 32, t.obj ) );
      hits += std::abs( r.best_fitness - best.best_score ) <= tolerance ? 1u : 0u;
    }
    ok = ok && hits >= required;
    detail += t.name + "=" + std::to_string( hits ) + " ";
  }
  bool const xor_ok = xor_best == 0.75 && tasks[1].topology.num_cells() == 1;
  double const elapsed = seconds_since( t0 );
  ok = ok && xor_ok && elapsed < budget_seconds;
  std::ostringstream s;
  s << detail << "xor_best=" << xor_best << " time=" << elapsed << "s (" << tasks.size()
    << " tasks <= 16 bits, >= 95/100 seeds within 1e-12 of the exhaustive optimum, xor exactly 0.75, < 300 s)";
  report( 4, "oracle equivalence", ok, s.str() );
}

void criterion_desk( fixture const& f, fixture const& again, bank_fixture const& b, double elapsed )
{
  bool const same = f.trained.best.bits == again.trained.best.bits && f.trained.best_fitness == again.trained.best_fitness;
  bool const shape = f.trained.network.num_layers() == 2 && f.trained.network.topology().n_inputs == 36 &&
                     f.trained.network.topology().n_outputs == 1;
  bool const ok = shape && f.accuracy >= 0.95 && same && b.accuracy >= 0.95 && b.trained.warnings.empty() && elapsed < 120.0;
  std::ostringstream s;
  s << "network_accuracy=" << f.accuracy << " rerun_identical=" << ( same ? "yes" : "no" ) << " bank_accuracy=" << b.accuracy
    << " time=" << elapsed << "s (>= 0.95 each, identical chromosome across 1 and 4 threads, < 120 s)";
  report( 5, "desk training", ok, s.str() );
}

bit_vector random_bits( std::size_t n, std::mt19937_64& g )
{
  bit_vector b( n );
  for ( auto& x : b )
    x = g() & 1u;
  return b;
}

memory_network random_network( tree_topology const& t, std::mt19937_64& g )
{
  memory_network net( t );
  net.assign_states( random_bits( net.num_devices(), g ) );
  return net;
}

void criterion_tolerance( fixture const& f )
{
  auto const t0 = clock_type::now();
  auto const rows = sensitivity_sweep( f.trained.network, f.task.data, { 0.05 }, 1000, 17 );
  double const flip = rows.front().flip_rate;

  constexpr std::size_t triples = 100000;
  std::mt19937_64 g( 23 );
  std::vector<tree_topology> const shapes = { build_tree_topology( 6, 6, 1 ), build_tree_topology( 36, 6, 1 ),
                                              build_tree_topology( 36, 6, 3 ) };
  std::size_t guaranteed = 0;
  std::size_t violations = 0;
  forward_trace nominal, perturbed;
  for ( std::size_t i = 0; i < triples; ++i )
  {
    auto const net = random_network( shapes[i % shapes.size()], g );
    auto const x = random_bits( net.topology().n_inputs, g );
    double const eps = 0.3 * static_cast<double>( g() % 1000 ) / 1000.0;
    auto const flags = stability_bound_check( net, x, eps );
    random_stream rng( 0x5eedULL, { i } );
    auto const p = perturb( net, { eps }, rng );
    network_forward( net, x, eval_mode::digital, &nominal );
    network_forward( p, x, eval_mode::digital, &perturbed );
    for ( std::size_t k = 0; k < net.num_cells(); ++k )
    {
      if ( flags[k] != stability::guaranteed_stable )
        continue;
      ++guaranteed;
      violations += nominal.bits[k] != perturbed.bits[k] ? 1u : 0u;
    }
  }
  double const elapsed = seconds_since( t0 );
  bool const ok = flip <= 0.01 && violations == 0 && guaranteed > 0 && elapsed < 120.0;
  std::ostringstream s;
  s << "flip_rate(eps=0.05, 1000 trials)=" << flip << " triples=" << triples << " stable_cells_checked=" << guaranteed
    << " stable_flips=" << violations << " time=" << elapsed << "s (flip rate <= 0.01, zero stable flips, < 120 s)";
  report( 6, "tolerance stability", ok, s.str() );
}

void criterion_accumulation( fixture const& f )
{
  auto const t0 = clock_type::now();
  std::vector<double> const gains = { 2, 5, 10, 20, 50 };
  auto const rows = accumulation_profile( f.trained.network, f.task.data, gains );
  bool ok = true;
  std::ostringstream s;
  for ( std::size_t i = 0; i < rows.size(); ++i )
  {
    s << "g" << rows[i].gain << "=" << rows[i].overall_mismatch << " ";
    if ( i > 0 && rows[i].overall_mismatch > rows[i - 1].overall_mismatch )
      ok = false;
    if ( rows[i].gain >= 20 && rows[i].overall_mismatch != 0.0 )
      ok = false;
  }

  std::mt19937_64 g( 29 );
  std::size_t single_layer_mismatch = 0;
  std::vector<double> const wide_gains = { 0.5, 1, 2, 5, 10, 20, 50, 1e6 };
  for ( auto const& t : { build_tree_topology( 6, 6, 1 ), build_tree_topology( 4, 2, 2 ), build_tree_topology( 36, 6, 6 ) } )
  {
    for ( int rep = 0; rep < 20; ++rep )
    {
      auto const net = random_network( t, g );
      dataset d;
      for ( int i = 0; i < 64; ++i )
      {
        d.inputs.push_back( random_bits( t.n_inputs, g ) );
        d.targets.push_back( random_bits( t.n_outputs, g ) );
      }
      for ( auto const& r : accumulation_profile( net, d, wide_gains ) )
        single_layer_mismatch += r.overall_mismatch != 0.0 ? 1u : 0u;
    }
  }
  double const elapsed = seconds_since( t0 );
  ok = ok && single_layer_mismatch == 0 && elapsed < 60.0;
  s << "single_layer_nonzero_rows=" << single_layer_mismatch << " time=" << elapsed
    << "s (0 at gain >= 20, non-increasing, single layer exactly 0, < 60 s)";
  report( 7, "error accumulation", ok, s.str() );
}

void criterion_faults( bank_fixture const& b )
{
  auto const t0 = clock_type::now();
  std::vector<double> const rates = { 0, 0.02, 0.05, 0.1 };
  constexpr std::size_t seeds = 30;
  constexpr double slack = 0.02;
  bool ok = true;
  std::ostringstream s;
  for ( auto kind : { stuck_at::high, stuck_at::low } )
  {
    auto const rows = bank_fault_sweep( b.trained.bank, b.data, rates, kind, seeds, 31 );
    s << ( kind == stuck_at::high ? "high:" : "low:" );
    for ( std::size_t i = 0; i < rows.size(); ++i )
    {
      s << " " << rows[i].mean_accuracy;
      if ( i > 0 && rows[i].mean_accuracy > rows[i - 1].mean_accuracy + slack )
        ok = false;
    }
    s << " ";
  }
  std::size_t invalid = 0;
  for ( auto kind : { stuck_at::high, stuck_at::low } )
  {
    for ( double rate : { 0.02, 0.05, 0.1, 0.5, 1.0 } )
    {
      for ( std::size_t i = 0; i < seeds; ++i )
      {
        random_stream rng( 37, { i } );
        auto const faulted = inject_bank_faults( b.trained.bank, rate, kind, rng );
        for ( auto const& x : b.data.inputs )
          invalid += classify( faulted, x ).winner < faulted.n_classes() ? 0u : 1u;
      }
    }
  }
  double const elapsed = seconds_since( t0 );
  ok = ok && invalid == 0 && elapsed < 180.0;
  s << "invalid_decisions=" << invalid << " time=" << elapsed
    << "s (30 seeds, each rate <= previous + 0.02, every decision a valid class, < 180 s)";
  report( 8, "fault tolerance", ok, s.str() );
}

struct cli_run
{
  std::string task;
  std::vector<std::pair<std::string, std::string>> flags;
};

int run_cli( fs::path const& cli, std::string const& task, std::vector<std::pair<std::string, std::string>> const& flags,
             fs::path const& log )
{
  std::string cmd = "\"" + cli.string() + "\" " + task;
  for ( auto const& [k, v] : flags )
    cmd += " --" + k + " \"" + v + "\"";
  cmd += " > \"" + log.string() + "\" 2>&1";
  return std::system( cmd.c_str() );
}

/* every .csv and .net file of `a`, compared byte for byte with its namesake in `b` */
bool same_outputs( fs::path const& a, fs::path const& b, std::size_t& compared )
{
  if ( !fs::is_directory( a ) || !fs::is_directory( b ) )
    return false;
  for ( auto const& e : fs::directory_iterator( a ) )
  {
    auto const ext = e.path().extension();
    if ( ext != ".csv" && ext != ".net" )
      continue;
    auto const other = b / e.path().filename();
    if ( !fs::exists( other ) || read_text( e.path() ) != read_text( other ) )
      return false;
    ++compared;
  }
  return true;
}

void criterion_determinism( fs::path const& cli, fs::path const& work )
{
  auto const root = work / "determinism";
  fs::remove_all( root );
  fs::create_directories( root );
  std::string const data = MEMNET_TEST_DATA;
  auto const net = ( root / "train_a" / "network.net" ).string();

  std::vector<cli_run> const runs = {
      { "size", { { "inputs", "1296" } } },
      { "capacity", { { "memory_bits", "1073741824" } } },
      { "train",
        { { "dataset", data + "/planted36.pat" },
          { "seed", "5" },
          { "objective", "margin" },
          { "margin_scope", "all" },
          { "population", "64" },
          { "generations", "60" } } },
      { "eval", { { "dataset", data + "/planted36.pat" }, { "network", net } } },
      { "perturb", { { "dataset", data + "/planted36.pat" }, { "network", net }, { "seed", "9" }, { "trials", "50" } } },
      { "faults", { { "dataset", data + "/planted36.pat" }, { "network", net }, { "seed", "9" }, { "fault_seeds", "10" } } },
      { "accumulate", { { "dataset", data + "/planted36.pat" }, { "network", net } } },
      { "classify", { { "dataset", data + "/prototypes4.pat" }, { "seed", "3" }, { "generations", "30" } } },
  };

  bool ok = true;
  std::string detail;
  std::size_t compared = 0;
  for ( auto const& r : runs )
  {
    auto const a = root / ( r.task + "_a" );
    auto const b = root / ( r.task + "_b" );
    auto flags = r.flags;
    flags.emplace_back( "output_dir", a.string() );
    flags.emplace_back( "threads", "1" );
    int const rc1 = run_cli( cli, r.task, flags, root / ( r.task + "_a.log" ) );
    int const rc2 = run_cli( cli, r.task,
                             { { "config", ( a / "config.txt" ).string() }, { "output_dir", b.string() }, { "threads", "4" } },
                             root / ( r.task + "_b.log" ) );
    std::size_t n = 0;
    bool const same = rc1 == 0 && rc2 == 0 && same_outputs( a, b, n ) && n > 0;
    compared += n;
    ok = ok && same;
    detail += r.task + ( same ? "=same " : "=DIFFERS " );
  }
  report( 9, "CLI determinism", ok,
          detail + "files=" + std::to_string( compared ) + " (rerun from echoed config with 4 threads, byte-identical)" );
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "memnet acceptance criteria" };
  std::string cli;
  std::string work;
  app.add_option( "--cli", cli, "memnet executable" )->required()->check( CLI::ExistingFile );
  app.add_option( "--work", work, "scratch directory" )->required();
  CLI11_PARSE( app, argc, argv );

  fs::path const cli_path = fs::absolute( cli );
  fs::path const work_path = fs::absolute( work );
  fs::create_directories( work_path );

  try
  {
    criterion_sizing();
    criterion_capacity( cli_path, work_path );
    criterion_closed_forms();
    criterion_oracle();

    auto const t0 = clock_type::now();
    auto const f = train_fixture( 1 );
    auto const t1 = clock_type::now();
    auto const again = train_fixture( 4 );
    auto const t2 = clock_type::now();
    auto const b = train_bank_fixture();
    double const desk_seconds = std::chrono::duration<double>( t1 - t0 ).count() + seconds_since( t2 );
    criterion_desk( f, again, b, desk_seconds );
    criterion_tolerance( f );
    criterion_accumulation( f );
    criterion_faults( b );
    criterion_determinism( cli_path, work_path );
  }
  catch ( std::exception const& e )
  {
    std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
    return 1;
  }

  std::cout << ( failures == 0 ? "all criteria passed" : std::to_string( failures ) + " criteria failed" ) << std::endl;
  return failures == 0 ? 0 : 1;
}
