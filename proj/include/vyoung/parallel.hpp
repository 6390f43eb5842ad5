#pragma once

// Index-parallel loops with deterministic reductions. Work items write to
// their own output slot; sums are taken afterwards in a fixed pairwise order,
// so results are bit-identical for every thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace vyoung {

/// Thread budget for the heavier loops. count == 0 means hardware concurrency.
struct Threads {
  unsigned count = 0;

  unsigned resolved() const {
    if (count > 0) return count;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
  }
};

/// Calls fn(i) for i in [0, n). Exceptions thrown by fn are rethrown (first one
/// wins) after all workers have joined.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, Threads threads = {}) {
  const std::size_t workers = std::min<std::size_t>(threads.resolved(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        // Strided assignment keeps heavy and light indices mixed.
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) summation; order depends only on the input length.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace vyoung
