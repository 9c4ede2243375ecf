// memnet: command-line front end for the memory-network experiments.
//
//   memnet <task> [--config FILE] [--<key> VALUE ...]
//
// Flags override keys from the config file; the merged configuration is
// written to <output_dir>/config.txt.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <memnet/experiment.hpp>

namespace
{

enum exit_code
{
  ok = 0,
  usage = 1,
  data = 2,
  internal = 3
};

int run( memnet::experiment_config cfg )
{
  try
  {
    auto const report = memnet::run_experiment( std::move( cfg ) );
    for ( auto const& n : report.notes )
      std::cout << "note: " << n << "\n";
    for ( auto const& w : report.warnings )
      std::cerr << "warning: " << w << "\n";
    for ( auto const& f : report.files )
      std::cout << ( report.output_dir / f ).string() << "\n";
    return ok;
  }
  catch ( memnet::config_error const& e )
  {
    std::cerr << "memnet: config error: " << e.what() << "\n";
    return usage;
  }
  catch ( memnet::data_error const& e )
  {
    std::cerr << "memnet: data error: " << e.what() << "\n";
    return data;
  }
  catch ( std::invalid_argument const& e )
  {
    std::cerr << "memnet: data error: " << e.what() << "\n";
    return data;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "memnet: internal error: " << e.what() << "\n";
    return internal;
  }
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Memory-network sizing, training and robustness experiments" };
  app.require_subcommand( 1 );

  std::string config_path;
  std::map<std::string, std::string> overrides;
  for ( auto const& task : memnet::experiment_tasks() )
  {
    auto* sub = app.add_subcommand( task, "run the " + task + " experiment" );
    sub->add_option( "--config", config_path, "key = value configuration file" )->check( CLI::ExistingFile );
    for ( auto const& key : memnet::config_keys() )
    {
      if ( key.name == "task" )
        continue;
      std::string const name( key.name );
      sub->add_option_function<std::string>(
          "--" + name, [&overrides, name]( std::string const& v ) { overrides[name] = v; }, std::string( key.help ) );
    }
  }

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::ParseError const& e )
  {
    auto const rc = app.exit( e );
    return rc == 0 ? ok : usage;
  }

  memnet::experiment_config cfg;
  try
  {
    if ( !config_path.empty() )
      cfg = memnet::load_config( config_path );
    for ( auto const& [k, v] : overrides )
      cfg.set( k, v );
    auto const* sub = app.get_subcommands().front();
    if ( cfg.has( "task" ) && cfg.get( "task" ) != sub->get_name() )
      throw memnet::config_error( "config file names task '" + cfg.get( "task" ) + "' but subcommand is '" +
                                  sub->get_name() + "'" );
    cfg.set( "task", sub->get_name() );
  }
  catch ( memnet::config_error const& e )
  {
    std::cerr << "memnet: config error: " << e.what() << "\n";
    return usage;
  }
  return run( std::move( cfg ) );
}
