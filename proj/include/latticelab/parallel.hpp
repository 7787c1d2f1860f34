#pragma once

#include <cstddef>
#include <functional>

namespace latticelab {

/// Worker count: hardware concurrency, capped by LATTICELAB_THREADS when set.
std::size_t worker_count();

/// Runs body(begin, end) over a static partition of [0, n). Chunks are
/// disjoint, so bodies that write only to their own range need no locking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace latticelab
