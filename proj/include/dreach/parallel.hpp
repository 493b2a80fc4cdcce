#pragma once

#include <cstddef>
#include <functional>

namespace dreach {

/// Number of worker threads used by per-node sweeps. Defaults to 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Calls body(begin, end) on disjoint contiguous chunks covering [0, n).
/// Chunk boundaries depend only on n and the thread count, and every index is
/// written by exactly one chunk, so results never depend on scheduling.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace dreach
