#pragma once

#include <cstddef>
#include <functional>

namespace gateseed {

// Worker count: hardware concurrency capped by GATESEED_THREADS when set.
unsigned worker_count();

// Runs fn(i) for i in [0, n) across worker_count() threads. Exceptions from
// workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gateseed
