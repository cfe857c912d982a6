#pragma once

#include <cstddef>
#include <functional>

namespace histoboost {

// Worker thread budget. HISTOBOOST_THREADS (if set and >= 1) wins over
// hardware concurrency. Re-read on every call so tests can vary it.
int worker_count();

// Runs fn(0..task_count-1) on up to max_workers threads (0 = worker_count()).
// Tasks must write to disjoint state; completion order is unspecified, so any
// order-sensitive reduction belongs to the caller, after the join.
// The first exception thrown by a task is rethrown on the calling thread.
void parallel_for(std::size_t task_count, const std::function<void(std::size_t)>& fn,
                  int max_workers = 0);

}  // namespace histoboost
