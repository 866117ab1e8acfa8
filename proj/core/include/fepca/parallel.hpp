#pragma once

#include <cstddef>
#include <functional>

namespace fepca {

/// Process-wide worker budget shared by every parallel_for in flight.
/// Defaults to the FEPCA_THREADS environment variable when set, otherwise
/// to the hardware concurrency. set_worker_count(0) restores that default.
void set_worker_count(int n);
int worker_count();

/// Runs task(0) .. task(count - 1) on up to worker_count() threads.
/// Scheduling is work-stealing over an atomic index, so iteration-to-thread
/// assignment varies from run to run — tasks must write only to their own
/// slot and draw randomness from their own substream, which the rest of the
/// library does; results are then identical for any worker count. Nested
/// calls run on the calling thread when the budget is already saturated.
/// The first exception thrown by a task is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace fepca
