#ifndef SKELSTAT_PARALLEL_HPP
#define SKELSTAT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace skelstat {

/// Worker count: `requested` if positive, else SKELSTAT_THREADS, else the
/// hardware concurrency.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SKELSTAT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n). Each index writes only its own output, so
/// results do not depend on the schedule. The first exception is rethrown.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  const int workers = std::min(std::max(1, threads), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace skelstat

#endif  // SKELSTAT_PARALLEL_HPP
