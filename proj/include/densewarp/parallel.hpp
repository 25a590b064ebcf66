#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace densewarp {

/// Execution settings threaded through the per-pixel kernels.
///
/// Every kernel writes disjoint outputs per work item, so results are
/// bit-identical for any thread count.
struct Exec {
  int threads = 1;
};

/// Runs fn(i) for i in [0, count), splitting the range into contiguous
/// chunks over exec.threads workers. The first exception thrown by any
/// worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(int count, const Exec& exec, Fn&& fn) {
  const int workers = std::clamp(exec.threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
      pool.emplace_back([&, begin, end] {
        try {
          for (int i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace densewarp
