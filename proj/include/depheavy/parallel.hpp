#pragma once

#include <cstddef>
#include <functional>

namespace depheavy {

/// Worker count: DEPHEAVY_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs body(worker, begin, end) over [0, n) split into contiguous chunks
/// handed out dynamically. `worker` is in [0, threads). Results must not
/// depend on which worker handles which chunk.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t worker, std::size_t begin,
                                           std::size_t end)>& body,
                  std::size_t chunk = 64);

}  // namespace depheavy
