#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace deint {

// Persistent worker pool for data-parallel loops inside tensor ops. Work is
// split into fixed contiguous chunks, each written by exactly one thread and
// with a fixed traversal order inside the chunk, so results are bitwise
// identical for any worker count. DEINT_THREADS caps the pool size.
class ThreadPool {
  public:
    static ThreadPool& instance();

    int workers() const { return workers_; }

    // Runs fn on contiguous sub-ranges of [0, n). The calling thread
    // participates. fn(begin, end) must not touch state shared with other
    // chunks. min_grain is the smallest n worth splitting; coarse loops
    // (one unit = one image channel) pass 2.
    void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn,
                      std::int64_t min_grain = 2048);

    ~ThreadPool();

  private:
    explicit ThreadPool(int workers);
    void worker_loop();

    int workers_ = 1;
    std::vector<std::thread> threads_;

    std::mutex mtx_;
    std::condition_variable cv_job_;
    std::condition_variable cv_done_;
    std::uint64_t generation_ = 0;
    bool stopping_ = false;
    const std::function<void(std::int64_t, std::int64_t)>* job_fn_ = nullptr;
    std::int64_t job_n_ = 0;
    int next_chunk_ = 0;
    int chunks_total_ = 0;
    int chunks_done_ = 0;

    std::mutex serial_mtx_;  // one parallel_for at a time
};

}  // namespace deint
