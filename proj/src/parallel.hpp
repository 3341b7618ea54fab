#ifndef PENCIL_SRC_PARALLEL_HPP
#define PENCIL_SRC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pencil::detail {

// Worker cap: PENCILSPEC_THREADS when set, hardware concurrency otherwise.
inline int thread_budget() {
  static const int n = [] {
    if (const char* env = std::getenv("PENCILSPEC_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return std::min(v, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
  }();
  return n;
}

// Index-sloted parallel loop; results must be written to per-index storage so
// the outcome is independent of scheduling. The first worker exception is
// rethrown on the calling thread.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  const int t = std::min(thread_budget(), n);
  if (t <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(t));
  for (int w = 0; w < t; ++w) {
    workers.emplace_back([&] {
      int i;
      while (!failed.load(std::memory_order_relaxed) && (i = next.fetch_add(1)) < n) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mu);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& th : workers) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pencil::detail

#endif
