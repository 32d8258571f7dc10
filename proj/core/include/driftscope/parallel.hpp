#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace driftscope {

// Process-wide worker count used by every parallel map. Defaults to the number of
// hardware threads. Results never depend on it.
std::size_t worker_count();
void set_worker_count(std::size_t n);

// Runs body(i) for i in [0, n) on up to worker_count() threads. Work is split into
// contiguous static blocks; the first exception thrown by any block is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Pairwise (cascade) summation; the association order depends only on values.size().
double pairwise_sum(std::span<const double> values);

}  // namespace driftscope
