#pragma once

#include <functional>

namespace cglab {

/// Worker count from CGLAB_WORKERS, else the hardware concurrency (at least 1).
int default_workers();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; the first exception is rethrown after all threads join.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace cglab
