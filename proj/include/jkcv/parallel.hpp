#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace jkcv {

/// Runs independent, index-addressed work units on a fixed number of threads.
/// Callers store results by index, so output never depends on completion
/// order. If units throw, the exception of the lowest failing index is
/// rethrown after all threads finish.
class Executor {
 public:
  /// workers == 0 means all available hardware threads.
  explicit Executor(std::size_t workers = 1) : workers_(workers) {
    if (workers_ == 0) workers_ = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }

  std::size_t workers() const { return workers_; }

  static Executor sequential() { return Executor(1); }

  template <class Fn>
  void for_each_index(std::size_t count, Fn&& fn) const {
    if (count == 0) return;
    const std::size_t threads = std::min(workers_, count);
    if (threads <= 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

 private:
  std::size_t workers_;
};

}  // namespace jkcv
