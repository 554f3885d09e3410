#pragma once

#include <cstddef>
#include <functional>

namespace mret {

/// Hardware concurrency, at least 1.
std::size_t default_thread_count() noexcept;

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is handed out
/// dynamically; callers write results by index so output order never depends
/// on scheduling. The first exception thrown by any fn is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace mret
