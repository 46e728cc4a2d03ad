#pragma once

#include <functional>

namespace epihmm {

/// Worker count resolution: explicit request, else the EPIHMM_WORKERS
/// environment variable, else hardware concurrency; always >= 1.
int worker_count(int requested = 0);

/// Runs fn(0..n-1) on up to `workers` threads. Results must be written to
/// index-addressed slots so the outcome is order-independent; the first
/// exception is rethrown on the caller after all threads join.
void parallel_for(int n, int workers, const std::function<void(int)> &fn);

} // namespace epihmm
