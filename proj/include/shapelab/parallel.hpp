#pragma once

#include <cstddef>
#include <functional>

namespace shapelab {

/// Worker count: hardware concurrency capped by SHAPELAB_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
/// visited exactly once, so writes to per-index slots are deterministic.
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace shapelab
