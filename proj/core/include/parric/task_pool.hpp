#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace parric {

/// Runs fn(0..n_tasks-1) on up to `workers` threads and joins them (one
/// fork-join per call, callers place a barrier between phases by calling
/// again).  Tasks must write to disjoint slots; with that discipline the
/// result is identical for every worker count, since no arithmetic crosses
/// task boundaries.  workers <= 1 degenerates to a plain loop.  The first
/// exception thrown by any task is rethrown after the join.
inline void run_tasks(int n_tasks, int workers, const std::function<void(int)>& fn) {
  if (n_tasks <= 0) return;
  const int n_threads = std::min(workers, n_tasks);
  if (n_threads <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : threads) th.join();
  for (std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace parric
