#ifndef ERGOFLOW_PARALLEL_HPP
#define ERGOFLOW_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace ergoflow
{

// ERGOFLOW_THREADS if set and positive, else the hardware concurrency.
std::size_t default_workers();

// Calls body(i) for i in [0, n) on `workers` threads (0 = default_workers()).
// Each index is handled exactly once; callers write into slot i so that any
// reduction afterwards sees the same order whatever the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body, std::size_t workers = 0);

} // namespace ergoflow

#endif
