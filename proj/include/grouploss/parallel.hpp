#pragma once

#include <cstddef>
#include <functional>

namespace grouploss {

/// Worker-thread cap. Defaults to GROUPLOSS_THREADS when set, otherwise the
/// hardware concurrency. Results never depend on this value.
std::size_t max_threads();

/// Overrides the cap for the current process; 0 restores the default.
void set_max_threads(std::size_t n);

/// Runs body(i) for i in [0, count). Iterations must write disjoint state.
/// The first exception thrown by any iteration is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace grouploss
