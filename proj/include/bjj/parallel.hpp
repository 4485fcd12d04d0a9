#pragma once
// Bounded worker pool over an indexed task list. Results land in
// caller-owned slots keyed by task index, so merge order never depends on
// completion order.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bjj {

inline std::size_t default_jobs(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

// Runs fn(i) for i in [0, n_tasks) on at most `jobs` threads. The first
// exception (lowest task index wins deterministically) is rethrown.
inline void run_parallel(std::size_t jobs, std::size_t n_tasks,
                         const std::function<void(std::size_t)>& fn) {
  jobs = std::min(default_jobs(jobs), n_tasks);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n_tasks);
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bjj
