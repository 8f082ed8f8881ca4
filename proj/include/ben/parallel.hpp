#pragma once

#include <cstddef>
#include <functional>

namespace ben {

/// Worker cap: BEN_THREADS when set, otherwise hardware concurrency.
int thread_limit();
/// Overrides the cap for this process (0 restores the environment default).
void set_thread_limit(int threads);

/// Runs fn(i) for i in [0, count) on up to thread_limit() threads, each
/// taking a contiguous block. Callers write per-index results and reduce
/// in index order, so results do not depend on the thread count. When
/// several indices throw, the exception from the lowest index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t min_block = 1);

}  // namespace ben
