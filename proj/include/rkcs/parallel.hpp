// SPDX-License-Identifier: Apache-2.0
//
// A small persistent worker pool with static chunking. Work items are
// assigned to chunks by index only, so any computation whose per-item result
// does not depend on the executing thread is reproducible for every thread
// count.
#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rkcs {

class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads) : n_threads_(std::max(1u, threads)) {
    for (unsigned k = 1; k < n_threads_; ++k) {
      workers_.emplace_back([this, k] { worker_loop(k); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_start_.notify_all();
    for (auto& t : workers_) t.join();
  }

  [[nodiscard]] unsigned size() const noexcept { return n_threads_; }

  /// Calls body(begin, end) on disjoint chunks covering [0, n). Chunk
  /// boundaries depend on n and the grain only. The first exception thrown by
  /// any chunk (lowest chunk index) is rethrown on the calling thread.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                    std::size_t grain = 1) {
    if (n == 0) return;
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t chunks = (n + grain - 1) / grain;
    if (n_threads_ == 1 || chunks == 1) {
      body(0, n);
      return;
    }
    std::unique_lock run_lock(run_mu_);
    {
      std::lock_guard lock(mu_);
      body_ = &body;
      n_ = n;
      grain_ = grain;
      chunks_ = chunks;
      next_chunk_ = 0;
      active_ = n_threads_ - 1;
      errors_.assign(chunks, nullptr);
      ++generation_;
    }
    cv_start_.notify_all();
    drain();
    {
      std::unique_lock lock(mu_);
      cv_done_.wait(lock, [this] { return active_ == 0; });
      body_ = nullptr;
    }
    for (auto& e : errors_) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  void drain() {
    for (;;) {
      std::size_t c;
      {
        std::lock_guard lock(mu_);
        if (next_chunk_ >= chunks_) return;
        c = next_chunk_++;
      }
      const std::size_t b = c * grain_;
      const std::size_t e = std::min(n_, b + grain_);
      try {
        (*body_)(b, e);
      } catch (...) {
        std::lock_guard lock(mu_);
        errors_[c] = std::current_exception();
      }
    }
  }

  void worker_loop(unsigned) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_start_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      drain();
      {
        std::lock_guard lock(mu_);
        --active_;
      }
      cv_done_.notify_one();
    }
  }

  unsigned n_threads_;
  std::vector<std::thread> workers_;
  std::mutex run_mu_;
  std::mutex mu_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::size_t grain_ = 1;
  std::size_t chunks_ = 0;
  std::size_t next_chunk_ = 0;
  unsigned active_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
};

/// Worker count from RKCS_THREADS, else the hardware parallelism.
inline unsigned configured_thread_count() {
  if (const char* env = std::getenv("RKCS_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline ThreadPool& default_pool() {
  static ThreadPool pool(configured_thread_count());
  return pool;
}

}  // namespace rkcs
