#pragma once

#include <cstddef>
#include <functional>

namespace inheritlab {

// Worker count: INHERITLAB_THREADS if set, otherwise hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once, so results
// written by index are independent of the thread count. The exception from the
// lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace inheritlab
