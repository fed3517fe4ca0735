#pragma once

#include <cstddef>
#include <functional>

namespace evopde {

/// Process-wide cap on worker threads (0 = hardware concurrency).
/// The acceptance harness sets this to 1 and parallelizes across whole
/// pipeline runs instead.
void set_max_threads(int n);
int max_threads();

/// Static-partition parallel loop. fn receives [begin, end) chunks.
/// Results must be written to disjoint, preallocated slots; under that
/// contract the output is identical for any thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace evopde
