#pragma once

#include <cstddef>
#include <functional>

namespace gpdiag {

/// Worker cap: GPDIAG_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_cap();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = thread_cap()).
/// Indices are handed out dynamically; callers write results into slots keyed
/// by i so output order never depends on scheduling. The first exception
/// thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace gpdiag
