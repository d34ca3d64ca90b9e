#include "banf/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace banf {
namespace {

std::size_t read_worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("BANF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && static_cast<std::size_t>(v) < hw)
            hw = static_cast<std::size_t>(v);
    }
    return hw;
}

thread_local bool tl_in_parallel = false;

class Pool {
public:
    static Pool& instance() {
        static Pool pool(worker_count());
        return pool;
    }

    void run(std::size_t blocks, std::size_t grain, std::size_t n,
             const std::function<void(std::size_t, std::size_t)>& body) {
        std::unique_lock<std::mutex> lock(mutex_);
        body_ = &body;
        grain_ = grain;
        n_ = n;
        next_.store(0, std::memory_order_relaxed);
        pending_ = blocks;
        ++generation_;
        lock.unlock();
        wake_.notify_all();

        work();

        std::unique_lock<std::mutex> wait_lock(mutex_);
        done_.wait(wait_lock, [this] { return pending_ == 0; });
        body_ = nullptr;
    }

    std::size_t threads() const { return workers_.size() + 1; }

private:
    explicit Pool(std::size_t total_threads) {
        for (std::size_t i = 1; i < total_threads; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        wake_.notify_all();
        for (auto& t : workers_) t.join();
    }

    void worker_loop() {
        tl_in_parallel = true;
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock<std::mutex> lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            lock.unlock();
            work();
        }
    }

    void work() {
        const bool was = tl_in_parallel;
        tl_in_parallel = true;
        for (;;) {
            const std::size_t begin = next_.fetch_add(grain_, std::memory_order_relaxed);
            if (begin >= n_) break;
            const std::size_t end = begin + grain_ < n_ ? begin + grain_ : n_;
            (*body_)(begin, end);
            std::lock_guard<std::mutex> lock(mutex_);
            if (--pending_ == 0) done_.notify_all();
        }
        tl_in_parallel = was;
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::atomic<std::size_t> next_{0};
    std::size_t grain_ = 1;
    std::size_t n_ = 0;
    std::size_t pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace

std::size_t worker_count() {
    static const std::size_t n = read_worker_count();
    return n;
}

void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    if (grain == 0) grain = 1;
    const std::size_t blocks = (n + grain - 1) / grain;
    if (blocks == 1 || worker_count() == 1 || tl_in_parallel) {
        body(0, n);
        return;
    }
    Pool::instance().run(blocks, grain, n, body);
}

} // namespace banf
