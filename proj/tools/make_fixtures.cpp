// make_fixtures: regenerates the pattern files under tests/data.
//
//   make_fixtures <output directory>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <memnet/io.hpp>
#include <memnet/synthetic.hpp>

namespace
{

void write( std::filesystem::path const& path, std::string const& text )
{
  std::ofstream out( path, std::ios::binary );
  out << text;
  if ( !out )
    throw std::runtime_error( "cannot write " + path.string() );
}

std::string pgm_p2( std::size_t w, std::size_t h, std::vector<int> const& px )
{
  std::string s = "P2\n# fixture\n" + std::to_string( w ) + " " + std::to_string( h ) + "\n255\n";
  for ( std::size_t i = 0; i < px.size(); ++i )
    s += std::to_string( px[i] ) + ( ( i + 1 ) % w == 0 ? "\n" : " " );
  return s;
}

std::string pgm_p5( std::size_t w, std::size_t h, std::vector<int> const& px )
{
  std::string s = "P5\n" + std::to_string( w ) + " " + std::to_string( h ) + "\n255\n";
  for ( int v : px )
    s += static_cast<char>( static_cast<unsigned char>( v ) );
  return s;
}

} // namespace

int main( int argc, char** argv )
{
  if ( argc != 2 )
  {
    std::cerr << "usage: make_fixtures <output directory>\n";
    return 1;
  }
  namespace fs = std::filesystem;
  fs::path const dir = argv[1];
  fs::create_directories( dir );

  {
    auto const t = memnet::make_planted_task( memnet::build_tree_topology( 36, 6, 1 ), 200, 7 );
    std::vector<std::string> labels;
    for ( auto const& y : t.data.targets )
      labels.push_back( memnet::to_string( y ) );
    write( dir / "planted36.pat", memnet::format_pattern_text( t.data, labels ) );
  }
  {
    auto const d = memnet::make_prototype_task( 4, 18, 25, 0.05, 11 );
    std::vector<std::string> labels;
    for ( auto c : d.classes )
      labels.push_back( d.class_names[c] );
    write( dir / "prototypes4.pat", memnet::format_pattern_text( d, labels ) );
  }

  fs::create_directories( dir / "pgm" / "dark" );
  fs::create_directories( dir / "pgm" / "light" );
  write( dir / "pgm" / "dark" / "a.pgm", pgm_p2( 3, 2, { 0, 10, 200, 20, 127, 128 } ) );
  write( dir / "pgm" / "dark" / "b.pgm", pgm_p5( 3, 2, { 5, 255, 0, 0, 0, 129 } ) );
  write( dir / "pgm" / "light" / "a.pgm", pgm_p5( 3, 2, { 250, 240, 230, 220, 210, 200 } ) );
  return 0;
}
