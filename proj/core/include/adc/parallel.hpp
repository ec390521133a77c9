#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace adc {

// Runs fn(item) for item in [0, n_items) across at most `workers` threads.
// Work is claimed per item; callers that need reproducible reductions must
// write into per-item slots and combine in index order afterwards.
inline void parallel_for(int n_items, int workers,
                         const std::function<void(int)>& fn) {
  if (n_items <= 0) return;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int n_threads = std::min<int>({workers < 1 ? 1 : workers, n_items, static_cast<int>(hw)});
  if (n_threads <= 1) {
    for (int i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_items || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace adc
