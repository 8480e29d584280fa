#pragma once

#include <cstddef>
#include <functional>

namespace noisycal {

// Worker count: NOISYCAL_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
std::size_t worker_count();

// Calls fn(i) for i in [0, count). Work items must write to disjoint outputs.
// Nested calls run serially on the calling thread. The first exception thrown
// by any item is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace noisycal
