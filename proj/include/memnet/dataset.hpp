#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"

namespace memnet
{

/*! \brief Labeled binary patterns.

  `targets` holds the expected network output per sample and `classes` a
  class index into `class_names`. Either may be empty, depending on whether
  the data feeds a single network or a classifier bank.
*/
struct dataset
{
  std::vector<bit_vector> inputs;
  std::vector<bit_vector> targets;
  std::vector<std::size_t> classes;
  std::vector<std::string> class_names;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_width() const { return inputs.empty() ? 0 : inputs.front().size(); }
  std::size_t target_width() const { return targets.empty() ? 0 : targets.front().size(); }
  bool has_targets() const { return !targets.empty(); }
  bool has_classes() const { return !classes.empty(); }

  void validate() const
  {
    if ( inputs.empty() )
      throw std::invalid_argument( "dataset is empty" );
    for ( std::size_t i = 0; i < inputs.size(); ++i )
    {
      if ( inputs[i].size() != inputs.front().size() )
        throw std::invalid_argument( "sample " + std::to_string( i ) + " has " + std::to_string( inputs[i].size() ) +
                                     " bits, expected " + std::to_string( inputs.front().size() ) );
    }
    if ( !targets.empty() )
    {
      if ( targets.size() != inputs.size() )
        throw std::invalid_argument( "target count differs from sample count" );
      for ( auto const& t : targets )
      {
        if ( t.size() != targets.front().size() || t.empty() )
          throw std::invalid_argument( "targets have non-uniform width" );
      }
    }
    if ( !classes.empty() )
    {
      if ( classes.size() != inputs.size() )
        throw std::invalid_argument( "class label count differs from sample count" );
      for ( auto c : classes )
      {
        if ( c >= class_names.size() )
          throw std::invalid_argument( "class index out of range" );
      }
    }
  }
};

} // namespace memnet
