#pragma once

#include <cstdint>
#include <functional>

namespace smj {

/// Worker count: SMJ_THREADS if set (>=1), else hardware concurrency.
unsigned thread_count();

/// Run fn(i) for i in [0, n). Work is chunked over thread_count() threads.
/// Callers keep determinism by writing to index i only; no reduction order
/// is imposed here.
void parallel_for(uint64_t n, const std::function<void(uint64_t)>& fn);

}  // namespace smj
