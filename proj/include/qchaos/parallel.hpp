// Deterministic parallel-for: worker count is capped by QCHAOS_THREADS, but
// the work decomposition is independent of the worker count, so results
// (including floating-point reductions combined in chunk order) do not
// depend on how many threads ran.
#pragma once

#include <cstddef>
#include <functional>

namespace qchaos {

/// Number of workers to use: min(hardware_concurrency, QCHAOS_THREADS),
/// at least 1. QCHAOS_THREADS=0 or unset means "hardware concurrency".
int worker_count();

/// Runs fn(i) for i in [0, n). Chunking is fixed (independent of worker
/// count); fn must only write to slots owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qchaos
