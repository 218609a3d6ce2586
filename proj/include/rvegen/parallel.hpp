#pragma once

#include <functional>

namespace rvegen {

/// Worker count from RVE_THREADS (unset or 0 means hardware concurrency).
int worker_count();

/// Runs body(k) for k in [0, count) on worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace rvegen
