#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace house {

// Runs fn(begin, end, thread_index) over [0, n) split into `threads`
// contiguous chunks. threads <= 1 runs inline on the calling thread, which
// is the deterministic reference path: chunk boundaries depend only on
// (n, threads), so any fixed thread count also yields a fixed work split.
// If a worker throws, one of the exceptions is rethrown after all join.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t, int)>& fn) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    fn(0, n, 0);
    return;
  }
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  const std::size_t base = n / t;
  const std::size_t extra = n % t;
  std::vector<std::thread> pool;
  pool.reserve(t);
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    const std::size_t end = begin + len;
    pool.emplace_back(
        [&fn, &first_error, &error_mu](std::size_t b, std::size_t e, int tid) {
          try {
            fn(b, e, tid);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
          }
        },
        begin, end, static_cast<int>(i));
    begin = end;
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace house
