#pragma once

/*!
  \file io.hpp
  \brief Pattern text, PGM image directories and network files
*/

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bits.hpp"
#include "dataset.hpp"
#include "network.hpp"

namespace memnet
{

/*! \brief Malformed or unreadable input data. */
class data_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/* shortest decimal text that parses back to the same double */
inline std::string format_double( double x )
{
  char buf[64];
  auto const r = std::to_chars( buf, buf + sizeof( buf ), x );
  return std::string( buf, r.ptr );
}

inline std::optional<double> parse_double( std::string_view s )
{
  double x = 0.0;
  auto const r = std::from_chars( s.data(), s.data() + s.size(), x );
  if ( r.ec != std::errc{} || r.ptr != s.data() + s.size() )
    return std::nullopt;
  return x;
}

inline std::optional<std::uint64_t> parse_uint( std::string_view s )
{
  std::uint64_t x = 0;
  auto const r = std::from_chars( s.data(), s.data() + s.size(), x );
  if ( s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size() )
    return std::nullopt;
  return x;
}

namespace detail
{

inline std::vector<std::string> split_ws( std::string const& line )
{
  std::istringstream in( line );
  std::vector<std::string> out;
  for ( std::string tok; in >> tok; )
    out.push_back( tok );
  return out;
}

inline std::string read_file( std::filesystem::path const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw data_error( "cannot read " + path.string() );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/* class names in sorted order; targets filled when every label is a uniform-width bit string */
inline void assign_labels( dataset& d, std::vector<std::string> const& labels )
{
  std::map<std::string, std::size_t> index;
  for ( auto const& l : labels )
    index.emplace( l, 0 );
  d.class_names.clear();
  for ( auto& [name, i] : index )
  {
    i = d.class_names.size();
    d.class_names.push_back( name );
  }
  d.classes.clear();
  for ( auto const& l : labels )
    d.classes.push_back( index.at( l ) );

  d.targets.clear();
  std::vector<bit_vector> targets;
  for ( auto const& l : labels )
  {
    bit_vector t;
    if ( !parse_bits( l, t ) || t.empty() || ( !targets.empty() && t.size() != targets.front().size() ) )
      return;
    targets.push_back( std::move( t ) );
  }
  d.targets = std::move( targets );
}

} // namespace detail

inline constexpr std::string_view pattern_header = "MEMNET-PAT 1";

/*! \brief Parses pattern text: a `MEMNET-PAT 1` header, then `<bits> <label>` per line.

  Blank lines are skipped. Errors name the 1-based line number.
*/
inline dataset parse_pattern_text( std::string const& text )
{
  std::istringstream in( text );
  std::string line;
  std::size_t line_no = 0;
  if ( !std::getline( in, line ) )
    throw data_error( "pattern file is empty" );
  ++line_no;
  if ( !line.empty() && line.back() == '\r' )
    line.pop_back();
  if ( line != pattern_header )
    throw data_error( "line 1: expected header '" + std::string( pattern_header ) + "'" );

  dataset d;
  std::vector<std::string> labels;
  while ( std::getline( in, line ) )
  {
    ++line_no;
    auto const tok = detail::split_ws( line );
    if ( tok.empty() )
      continue;
    auto const where = "line " + std::to_string( line_no ) + ": ";
    if ( tok.size() != 2 )
      throw data_error( where + "expected '<bits> <label>'" );
    bit_vector x;
    if ( !parse_bits( tok[0], x ) || x.empty() )
      throw data_error( where + "pattern contains a character other than 0 or 1" );
    if ( !d.inputs.empty() && x.size() != d.inputs.front().size() )
      throw data_error( where + "pattern has " + std::to_string( x.size() ) + " bits, expected " +
                        std::to_string( d.inputs.front().size() ) );
    d.inputs.push_back( std::move( x ) );
    labels.push_back( tok[1] );
  }
  if ( d.inputs.empty() )
    throw data_error( "pattern file has no samples" );
  detail::assign_labels( d, labels );
  return d;
}

inline dataset load_pattern_text( std::filesystem::path const& path )
{
  try
  {
    return parse_pattern_text( detail::read_file( path ) );
  }
  catch ( data_error const& e )
  {
    throw data_error( path.string() + ": " + e.what() );
  }
}

inline std::string format_pattern_text( dataset const& d, std::vector<std::string> const& labels )
{
  std::string out( pattern_header );
  out += '\n';
  for ( std::size_t i = 0; i < d.size(); ++i )
    out += to_string( d.inputs[i] ) + " " + labels.at( i ) + "\n";
  return out;
}

struct gray_image
{
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/*! \brief Decodes an 8-bit P2 (text) or P5 (binary) PGM image. */
inline gray_image parse_pgm( std::string const& bytes )
{
  std::size_t pos = 0;
  auto skip = [&] {
    while ( pos < bytes.size() )
    {
      if ( bytes[pos] == '#' )
      {
        while ( pos < bytes.size() && bytes[pos] != '\n' )
          ++pos;
      }
      else if ( std::isspace( static_cast<unsigned char>( bytes[pos] ) ) )
        ++pos;
      else
        break;
    }
  };
  auto number = [&]( char const* what ) {
    skip();
    std::size_t start = pos;
    while ( pos < bytes.size() && std::isdigit( static_cast<unsigned char>( bytes[pos] ) ) )
      ++pos;
    auto v = parse_uint( std::string_view( bytes ).substr( start, pos - start ) );
    if ( !v )
      throw data_error( std::string( "PGM: bad " ) + what );
    return *v;
  };

  if ( bytes.size() < 2 || bytes[0] != 'P' || ( bytes[1] != '2' && bytes[1] != '5' ) )
    throw data_error( "PGM: not a P2 or P5 image" );
  bool const binary = bytes[1] == '5';
  pos = 2;
  gray_image img;
  img.width = number( "width" );
  img.height = number( "height" );
  auto const maxval = number( "maxval" );
  if ( img.width == 0 || img.height == 0 || img.width * img.height > ( std::size_t{ 1 } << 24 ) )
    throw data_error( "PGM: unsupported image size" );
  if ( maxval == 0 || maxval > 255 )
    throw data_error( "PGM: only 8-bit images are supported" );
  auto const n = img.width * img.height;
  img.pixels.resize( n );
  if ( binary )
  {
    ++pos; // single whitespace after maxval
    if ( bytes.size() < pos + n )
      throw data_error( "PGM: truncated pixel data" );
    for ( std::size_t i = 0; i < n; ++i )
      img.pixels[i] = static_cast<std::uint8_t>( bytes[pos + i] );
  }
  else
  {
    for ( std::size_t i = 0; i < n; ++i )
    {
      auto const v = number( "pixel value" );
      if ( v > maxval )
        throw data_error( "PGM: pixel value above maxval" );
      img.pixels[i] = static_cast<std::uint8_t>( v );
    }
  }
  return img;
}

/* row-major, pixel >= threshold becomes 1 */
inline bit_vector binarize( gray_image const& img, unsigned threshold = 128 )
{
  bit_vector bits( img.pixels.size() );
  for ( std::size_t i = 0; i < bits.size(); ++i )
    bits[i] = img.pixels[i] >= threshold ? 1 : 0;
  return bits;
}

/*! \brief Loads `root/<class>/<image>.pgm`; the label is the subdirectory name.

  Classes and files are visited in sorted name order.
*/
inline dataset load_pgm_directory( std::filesystem::path const& root, unsigned threshold = 128 )
{
  namespace fs = std::filesystem;
  std::error_code ec;
  if ( !fs::is_directory( root, ec ) )
    throw data_error( "cannot read image directory " + root.string() );
  std::vector<fs::path> classes;
  for ( auto const& e : fs::directory_iterator( root ) )
  {
    if ( e.is_directory() )
      classes.push_back( e.path() );
  }
  std::sort( classes.begin(), classes.end() );

  dataset d;
  std::vector<std::string> labels;
  for ( auto const& dir : classes )
  {
    std::vector<fs::path> files;
    for ( auto const& e : fs::directory_iterator( dir ) )
    {
      if ( e.is_regular_file() && e.path().extension() == ".pgm" )
        files.push_back( e.path() );
    }
    std::sort( files.begin(), files.end() );
    for ( auto const& f : files )
    {
      bit_vector x;
      try
      {
        x = binarize( parse_pgm( detail::read_file( f ) ), threshold );
      }
      catch ( data_error const& e )
      {
        throw data_error( f.string() + ": " + e.what() );
      }
      if ( !d.inputs.empty() && x.size() != d.inputs.front().size() )
        throw data_error( f.string() + ": image has " + std::to_string( x.size() ) + " pixels, expected " +
                          std::to_string( d.inputs.front().size() ) );
      d.inputs.push_back( std::move( x ) );
      labels.push_back( dir.filename().string() );
    }
  }
  if ( d.inputs.empty() )
    throw data_error( "no PGM images under " + root.string() );
  detail::assign_labels( d, labels );
  // subdirectory names are class names, never bit targets
  d.targets.clear();
  return d;
}

inline constexpr int network_format_version = 1;

/*! \brief Canonical text form of a network. Equal networks give identical text. */
inline std::string format_network( memory_network const& net )
{
  std::ostringstream out;
  auto const& t = net.topology();
  auto const& p = net.params();
  out << "MEMNET-NET " << network_format_version << "\n";
  out << "inputs " << t.n_inputs << "\n";
  out << "padded_inputs " << t.n_padded_inputs << "\n";
  out << "outputs " << t.n_outputs << "\n";
  out << "layers " << t.layers.size() << "\n";
  for ( auto const& l : t.layers )
  {
    out << "layer " << l.n_sources << " " << l.n_padded << " " << l.width() << "\n";
    for ( auto const& w : l.wiring )
    {
      out << "cell";
      for ( auto s : w )
        out << " " << s;
      out << "\n";
    }
  }
  out << "vdd " << format_double( p.vdd ) << "\n";
  out << "vth " << format_double( p.vth ) << "\n";
  out << "g_on " << format_double( p.g_on ) << "\n";
  out << "g_off " << format_double( p.g_off ) << "\n";
  if ( net.inverter().kind == inverter_kind::ideal )
    out << "inverter ideal\n";
  else
    out << "inverter sigmoid " << format_double( net.inverter().gain ) << "\n";
  out << "states " << to_string( net.states() ) << "\n";
  if ( net.has_conductances() )
  {
    out << "conductances";
    for ( double g : net.conductances() )
      out << " " << format_double( g );
    out << "\n";
  }
  bool any_fault = false;
  for ( auto const& f : net.faults() )
    any_fault = any_fault || f.has_value();
  if ( any_fault )
  {
    out << "faults";
    for ( std::size_t k = 0; k < net.num_cells(); ++k )
    {
      if ( auto f = net.fault( k ) )
        out << " " << k << ":" << ( *f == stuck_at::high ? 'H' : 'L' );
    }
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

inline memory_network parse_network( std::string const& text )
{
  std::istringstream in( text );
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> tok;

  auto fail = [&]( std::string const& msg ) -> void {
    throw data_error( "network file line " + std::to_string( line_no ) + ": " + msg );
  };
  auto next = [&]( char const* key, std::size_t min_args, std::size_t max_args ) {
    if ( !std::getline( in, line ) )
    {
      ++line_no;
      fail( std::string( "unexpected end of file, expected '" ) + key + "'" );
    }
    ++line_no;
    tok = detail::split_ws( line );
    if ( tok.empty() || tok[0] != key )
      fail( std::string( "expected '" ) + key + "'" );
    if ( tok.size() - 1 < min_args || tok.size() - 1 > max_args )
      fail( std::string( "wrong number of fields for '" ) + key + "'" );
  };
  auto uint_at = [&]( std::size_t i ) {
    auto v = parse_uint( tok.at( i ) );
    if ( !v )
      fail( "expected a non-negative integer, got '" + tok.at( i ) + "'" );
    return static_cast<std::size_t>( *v );
  };
  auto double_at = [&]( std::size_t i ) {
    auto v = parse_double( tok.at( i ) );
    if ( !v )
      fail( "expected a number, got '" + tok.at( i ) + "'" );
    return *v;
  };

  next( "MEMNET-NET", 1, 1 );
  if ( auto const v = uint_at( 1 ); v != static_cast<std::size_t>( network_format_version ) )
    fail( "unsupported network file version " + std::to_string( v ) + " (this build reads version " +
          std::to_string( network_format_version ) + ")" );

  tree_topology t;
  next( "inputs", 1, 1 );
  t.n_inputs = uint_at( 1 );
  next( "padded_inputs", 1, 1 );
  t.n_padded_inputs = uint_at( 1 );
  next( "outputs", 1, 1 );
  t.n_outputs = uint_at( 1 );
  next( "layers", 1, 1 );
  auto const n_layers = uint_at( 1 );
  if ( n_layers > 64 )
    fail( "too many layers" );
  for ( std::size_t l = 0; l < n_layers; ++l )
  {
    next( "layer", 3, 3 );
    layer_spec spec;
    spec.n_sources = uint_at( 1 );
    spec.n_padded = uint_at( 2 );
    auto const cells = uint_at( 3 );
    if ( cells > ( std::size_t{ 1 } << 28 ) )
      fail( "layer too wide" );
    for ( std::size_t c = 0; c < cells; ++c )
    {
      next( "cell", 1, max_fan_in );
      std::vector<std::size_t> w;
      for ( std::size_t i = 1; i < tok.size(); ++i )
        w.push_back( uint_at( i ) );
      spec.wiring.push_back( std::move( w ) );
    }
    t.layers.push_back( std::move( spec ) );
  }

  circuit_params p;
  next( "vdd", 1, 1 );
  p.vdd = double_at( 1 );
  next( "vth", 1, 1 );
  p.vth = double_at( 1 );
  next( "g_on", 1, 1 );
  p.g_on = double_at( 1 );
  next( "g_off", 1, 1 );
  p.g_off = double_at( 1 );

  inverter_model inv;
  next( "inverter", 1, 2 );
  if ( tok[1] == "ideal" && tok.size() == 2 )
    inv = inverter_model::ideal();
  else if ( tok[1] == "sigmoid" && tok.size() == 3 )
    inv = { inverter_kind::sigmoid, double_at( 2 ) };
  else
    fail( "inverter must be 'ideal' or 'sigmoid <gain>'" );

  memory_network net;
  try
  {
    net = memory_network( t, p, inv );
  }
  catch ( std::invalid_argument const& e )
  {
    fail( e.what() );
  }

  next( "states", 1, 1 );
  bit_vector states;
  if ( !parse_bits( tok[1], states ) )
    fail( "states contain a character other than 0 or 1" );
  if ( states.size() != net.num_devices() )
    fail( "states have " + std::to_string( states.size() ) + " bits, topology needs " + std::to_string( net.num_devices() ) );
  net.assign_states( states );

  while ( true )
  {
    if ( !std::getline( in, line ) )
    {
      ++line_no;
      fail( "missing 'end'" );
    }
    ++line_no;
    tok = detail::split_ws( line );
    if ( tok.empty() )
      fail( "unexpected blank line" );
    if ( tok[0] == "end" && tok.size() == 1 )
      break;
    if ( tok[0] == "conductances" && !net.has_conductances() && !net.has_faults() )
    {
      if ( tok.size() - 1 != net.num_devices() )
        fail( "conductance count differs from device count" );
      std::vector<double> g;
      for ( std::size_t i = 1; i < tok.size(); ++i )
        g.push_back( double_at( i ) );
      try
      {
        net.set_conductances( std::move( g ) );
      }
      catch ( std::invalid_argument const& e )
      {
        fail( e.what() );
      }
    }
    else if ( tok[0] == "faults" && !net.has_faults() && tok.size() > 1 )
    {
      for ( std::size_t i = 1; i < tok.size(); ++i )
      {
        auto const colon = tok[i].find( ':' );
        if ( colon == std::string::npos || colon + 2 != tok[i].size() )
          fail( "fault entries look like <cell>:H or <cell>:L" );
        auto const k = parse_uint( std::string_view( tok[i] ).substr( 0, colon ) );
        char const kind = tok[i].back();
        if ( !k || *k >= net.num_cells() || ( kind != 'H' && kind != 'L' ) )
          fail( "bad fault entry '" + tok[i] + "'" );
        net.set_fault( *k, kind == 'H' ? stuck_at::high : stuck_at::low );
      }
    }
    else
      fail( "unexpected field '" + tok[0] + "'" );
  }
  if ( std::getline( in, line ) && !detail::split_ws( line ).empty() )
  {
    ++line_no;
    fail( "content after 'end'" );
  }
  return net;
}

inline void save_network( memory_network const& net, std::filesystem::path const& path )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw data_error( "cannot write " + path.string() );
  out << format_network( net );
  if ( !out )
    throw data_error( "error writing " + path.string() );
}

inline memory_network load_network( std::filesystem::path const& path )
{
  try
  {
    return parse_network( detail::read_file( path ) );
  }
  catch ( data_error const& e )
  {
    throw data_error( path.string() + ": " + e.what() );
  }
}

} // namespace memnet
