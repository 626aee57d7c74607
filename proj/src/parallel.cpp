#include "deint/parallel.hpp"

#include <algorithm>
#include <cstdlib>

namespace deint {

namespace {

int configured_workers() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int n = std::min(hw, 8);
    if (const char* env = std::getenv("DEINT_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = cap;
    }
    return n;
}

}  // namespace

ThreadPool& ThreadPool::instance() {
    static ThreadPool pool(configured_workers());
    return pool;
}

ThreadPool::ThreadPool(int workers) : workers_(std::max(1, workers)) {
    for (int i = 0; i < workers_ - 1; ++i) {
        threads_.emplace_back([this] { worker_loop(); });
    }
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lock(mtx_);
        stopping_ = true;
    }
    cv_job_.notify_all();
    for (auto& t : threads_) t.join();
}

void ThreadPool::worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
        const std::function<void(std::int64_t, std::int64_t)>* fn = nullptr;
        std::int64_t n = 0;
        int chunks = 0;
        {
            std::unique_lock<std::mutex> lock(mtx_);
            cv_job_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
            fn = job_fn_;
            n = job_n_;
            chunks = chunks_total_;
        }
        for (;;) {
            int chunk = -1;
            {
                std::lock_guard<std::mutex> lock(mtx_);
                if (generation_ != seen || next_chunk_ >= chunks) break;
                chunk = next_chunk_++;
            }
            const std::int64_t per = (n + chunks - 1) / chunks;
            const std::int64_t begin = chunk * per;
            const std::int64_t end = std::min<std::int64_t>(n, begin + per);
            if (begin < end) (*fn)(begin, end);
            {
                std::lock_guard<std::mutex> lock(mtx_);
                if (++chunks_done_ == chunks_total_) cv_done_.notify_all();
            }
        }
    }
}

void ThreadPool::parallel_for(std::int64_t n,
                              const std::function<void(std::int64_t, std::int64_t)>& fn,
                              std::int64_t min_grain) {
    if (n <= 0) return;
    if (workers_ == 1 || n < min_grain) {
        fn(0, n);
        return;
    }
    std::lock_guard<std::mutex> serial(serial_mtx_);
    const int chunks = std::min<std::int64_t>(workers_, n);
    {
        std::lock_guard<std::mutex> lock(mtx_);
        job_fn_ = &fn;
        job_n_ = n;
        next_chunk_ = 0;
        chunks_total_ = chunks;
        chunks_done_ = 0;
        ++generation_;
    }
    cv_job_.notify_all();
    // calling thread takes chunks too
    for (;;) {
        int chunk = -1;
        {
            std::lock_guard<std::mutex> lock(mtx_);
            if (next_chunk_ >= chunks) break;
            chunk = next_chunk_++;
        }
        const std::int64_t per = (n + chunks - 1) / chunks;
        const std::int64_t begin = chunk * per;
        const std::int64_t end = std::min<std::int64_t>(n, begin + per);
        if (begin < end) fn(begin, end);
        {
            std::lock_guard<std::mutex> lock(mtx_);
            ++chunks_done_;
        }
    }
    std::unique_lock<std::mutex> lock(mtx_);
    cv_done_.wait(lock, [&] { return chunks_done_ == chunks_total_; });
}

}  // namespace deint
