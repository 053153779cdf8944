#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace spinhydro {

/// Default worker count: hardware threads, at least 1.
inline int default_workers() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

/// Calls fn(i) for i in [0, count) on up to `workers` threads using
/// contiguous index blocks. fn must only write state owned by index i.
/// The first exception (lowest block) is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), std::max<std::size_t>(1, count));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t begin = count * k / w;
    const std::size_t end = count * (k + 1) / w;
    threads.emplace_back([&, begin, end, k] {
      try {
        for (std::size_t i = begin; i < end; ++i) {
          fn(i);
        }
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace spinhydro
