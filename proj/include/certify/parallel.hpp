#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace certify {

// Static partition of [0, count) over the requested number of threads.
// Each index is processed exactly once and the partition depends only on
// (count, threads), so results land in caller-owned slots deterministically.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (threads > count) threads = static_cast<unsigned>(count);

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t base = count / threads;
  const std::size_t extra = count % threads;
  std::size_t begin = 0;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t len = base + (t < extra ? 1 : 0);
    const std::size_t end = begin + len;
    pool.emplace_back([&fn, &error, &error_mutex, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace certify
