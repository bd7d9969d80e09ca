#pragma once

#include <cstddef>
#include <functional>

namespace dabm {

/// Runs body(i) for i in [0, n) on up to `threads` std::threads.  Work is
/// handed out by an atomic counter; callers write results by index, so the
/// outcome does not depend on the thread count.  The first exception thrown
/// by any body is rethrown after all threads join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace dabm
