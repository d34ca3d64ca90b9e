#pragma once

#include <cstddef>
#include <functional>

namespace banf {

/// Number of worker threads the pool uses. Defaults to the hardware thread
/// count; the BANF_THREADS environment variable caps it (minimum 1).
std::size_t worker_count();

/// Runs body(begin, end) over [0, n) split into fixed blocks of `grain`
/// elements. The block decomposition depends only on n and grain, never on
/// the thread count, so any work whose blocks write disjoint outputs is
/// bit-reproducible at every BANF_THREADS setting. Reductions should write
/// per-block partials and combine them sequentially afterwards.
///
/// Nested calls run inline on the calling thread.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace banf
