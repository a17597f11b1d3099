#pragma once

#include <cstddef>
#include <functional>

namespace cnade {

/// Worker cap: CAUSAL_NADE_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs task(i) for i in [0, n) on up to worker_count() threads. If any task
/// throws, the exception of the lowest failing index is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace cnade
