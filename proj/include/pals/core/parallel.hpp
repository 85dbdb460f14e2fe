#pragma once

#include <cstddef>
#include <functional>

namespace pals {

/// Worker cap used by parallel_for; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, so any
/// per-index output stays deterministic; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pals
