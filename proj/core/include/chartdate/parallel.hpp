#pragma once

#include <cstddef>
#include <functional>

namespace chartdate {

/// Worker count taken from CHARTDATE_WORKERS, else the hardware
/// concurrency, never less than 1.
std::size_t default_worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into slot i so output order
/// never depends on scheduling. The first exception thrown by any body is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace chartdate
