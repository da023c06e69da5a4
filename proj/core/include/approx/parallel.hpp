#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace approx {

/// Number of workers to use: explicit request, else APPROX_JOBS, else 1.
inline int resolve_jobs(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("APPROX_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// Runs fn(i) for i in [0, n). Work items must be independent; callers store
/// results indexed by i so reductions happen later in fixed order and the
/// outcome is identical for any worker count.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = resolve_jobs(jobs);
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  const int workers = std::min(jobs, n);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace approx
