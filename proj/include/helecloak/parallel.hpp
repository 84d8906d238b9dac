#pragma once

#include <cstddef>
#include <functional>

namespace helecloak {

// Worker count: HELECLOAK_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n). Work is split into contiguous blocks; each
// index is processed by exactly one worker so results do not depend on the
// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace helecloak
