#pragma once

#include <cstddef>
#include <functional>

namespace tandem {

/// Worker count: hardware concurrency, capped by the RSC_THREADS environment
/// variable when it holds a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) over contiguous chunks. Bodies must only
/// write to disjoint locations. The first exception thrown by a body is
/// rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace tandem
