#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mvlang::detail {

// Runs fn(i) for i in [0, count) across a small thread pool. Slots are
// independent, so results merge order-free and thread-count independent.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(std::max(count, 0)));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = static_cast<int>(t); i < count; i += static_cast<int>(workers)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mvlang::detail
