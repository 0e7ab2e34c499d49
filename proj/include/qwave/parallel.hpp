#pragma once

#include <cstddef>
#include <functional>

namespace qwave {

/// Worker count: QWAVE_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
/// so writes to per-index slots give the same result as a sequential loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace qwave
