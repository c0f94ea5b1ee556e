#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace layerflow {

/// Runs fn(k) for k in [0, n) on up to `threads` workers. Each index must only
/// write its own outputs; results are then independent of the worker count.
template <class F>
void parallel_for(std::size_t n, int threads, F &&fn) {
  const std::size_t w = std::min<std::size_t>(threads > 1 ? threads : 1, n / 256 + 1);
  if (w <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&, t] {
      try {
        const std::size_t b = t * chunk, e = std::min(n, b + chunk);
        for (std::size_t k = b; k < e; ++k) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto &th : pool) th.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace layerflow
