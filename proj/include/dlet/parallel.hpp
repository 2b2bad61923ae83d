#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dlet {

/// Run body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// workers (0 means hardware concurrency). The first exception thrown by a
/// worker is rethrown on the calling thread.
template <class Body>
void parallel_for(long long n, unsigned threads, Body&& body) {
  if (n <= 0) return;
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<long long>(workers, n));
  if (workers <= 1) {
    body(0LL, n);
    return;
  }
  std::exception_ptr error;
  std::mutex guard;
  std::vector<std::thread> pool;
  const long long chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const long long b = w * chunk;
    const long long e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        body(b, e);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dlet
