// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace neubtf {

/// Worker cap: NEUBTF_THREADS when set to a positive integer, otherwise the
/// hardware concurrency. A deterministic override forces 1.
int worker_count();
void set_worker_override(int workers);

/// Runs body(i) for i in [0, n) over up to worker_count() threads. Each index
/// runs exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace neubtf
