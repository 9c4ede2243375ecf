#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace memnet
{

/*! \brief Calls `fn(i)` for every `i` in `[0, n)` on up to `threads` workers.

  Work is split into contiguous blocks. The first exception thrown by any
  worker is rethrown on the calling thread. `threads == 0` means one per
  hardware thread.
*/
template<class Fn>
void parallel_for( std::size_t n, std::size_t threads, Fn&& fn )
{
  if ( threads == 0 )
    threads = std::max<std::size_t>( 1, std::thread::hardware_concurrency() );
  threads = std::min( threads, n );
  if ( threads <= 1 )
  {
    for ( std::size_t i = 0; i < n; ++i )
      fn( i );
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve( threads );
  for ( std::size_t t = 0; t < threads; ++t )
  {
    std::size_t const lo = n * t / threads;
    std::size_t const hi = n * ( t + 1 ) / threads;
    workers.emplace_back( [&, lo, hi] {
      try
      {
        for ( std::size_t i = lo; i < hi; ++i )
          fn( i );
      }
      catch ( ... )
      {
        std::lock_guard lock( error_mutex );
        if ( !error )
          error = std::current_exception();
      }
    } );
  }
  for ( auto& w : workers )
    w.join();
  if ( error )
    std::rethrow_exception( error );
}

} // namespace memnet
