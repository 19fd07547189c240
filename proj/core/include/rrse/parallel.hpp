#pragma once

#include <cstddef>
#include <functional>

namespace rrse {

/// Worker cap: RRSE_THREADS if set and positive, else hardware concurrency.
std::size_t worker_limit();

/// Runs fn(i) for i in [0, n). Work items must be independent; results are
/// identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rrse
