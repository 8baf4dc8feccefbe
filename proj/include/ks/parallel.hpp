#pragma once

#include <cstddef>
#include <functional>

namespace ks {

// Thread cap: KS_SELFSIM_THREADS (0 or unset = hardware concurrency).
unsigned thread_cap();

// Deterministic parallel map: fn(i) for i in [0, n); each index writes only
// its own slot, so results are identical for any thread count. Exceptions are
// captured and rethrown on the caller thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ks
