#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sof {

/// Fixed-size worker pool for index-based parallel loops. Work is handed out
/// as a shared atomic counter; callers must write results into pre-assigned
/// slots so output does not depend on scheduling.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned num_threads)
      : num_threads_(num_threads == 0 ? 1 : num_threads) {}

  unsigned num_threads() const { return num_threads_; }

  void parallel_for(int begin, int end, const std::function<void(int)>& body) const {
    if (end <= begin) return;
    const unsigned workers = std::min<unsigned>(num_threads_, unsigned(end - begin));
    if (workers <= 1) {
      for (int i = begin; i < end; ++i) body(i);
      return;
    }
    std::atomic<int> next{begin};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1)) body(i);
      });
    }
    for (auto& t : threads) t.join();
  }

 private:
  unsigned num_threads_;
};

}  // namespace sof
