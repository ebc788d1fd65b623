#pragma once

#include <cstddef>
#include <functional>

namespace csnt {

/// Upper bound on worker threads used inside the library. Defaults to the
/// hardware concurrency; values < 1 are clamped to 1.
void set_thread_limit(int n);
int thread_limit();

/// Runs body(i) for i in [0, count) on up to thread_limit() threads. Work is
/// split into contiguous blocks, so results written per index do not depend
/// on the thread count. The first exception thrown by a worker is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace csnt
