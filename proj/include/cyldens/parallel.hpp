#pragma once

#include <cstddef>
#include <functional>

namespace cyldens {

//! Worker count: explicit request, else the CYLDENS_THREADS environment
//! variable, else hardware concurrency.
std::size_t resolve_thread_count(std::size_t requested = 0);

//! Run fn(i) for i in [0, count) on a small thread pool. Work items must be
//! independent; exceptions are captured and the first one rethrown after all
//! workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

} // namespace cyldens
