#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace crowdflow {

/// Splits [0, n) into `chunks` contiguous ranges and runs fn(chunk, begin, end) on up to
/// `threads` workers. Chunk boundaries depend only on n and chunks, never on threads.
template <typename Fn>
void for_each_chunk(int n, int chunks, int threads, Fn&& fn) {
  chunks = std::max(1, std::min(chunks, std::max(n, 1)));
  auto range = [&](int c) {
    const long long b = static_cast<long long>(n) * c / chunks;
    const long long e = static_cast<long long>(n) * (c + 1) / chunks;
    return std::pair<int, int>(static_cast<int>(b), static_cast<int>(e));
  };
  threads = std::clamp(threads, 1, chunks);
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) {
      auto [b, e] = range(c);
      fn(c, b, e);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int c = t; c < chunks; c += threads) {
          auto [b, e] = range(c);
          fn(c, b, e);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

/// Runs fn(i) for i in [0, n) on a pool of `threads` workers pulling indices in order.
template <typename Fn>
void parallel_tasks(int n, int threads, Fn&& fn) {
  for_each_chunk(n, n, threads, [&](int, int b, int e) {
    for (int i = b; i < e; ++i) fn(i);
  });
}

}  // namespace crowdflow
