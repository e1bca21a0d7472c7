#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tep {

// 0 means "use hardware concurrency".
inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(worker_id, index) for every index in [0, count) on `workers`
// threads, pulling indices from a shared atomic counter. Joining all
// threads before returning acts as a barrier; callers are responsible for
// making their reductions order-independent. The first exception thrown
// by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (count == 0) return;
    if (workers == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(0u, i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> abort{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                while (!abort.load(std::memory_order_relaxed)) {
                    const std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
                    if (i >= count) break;
                    fn(w, i);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                abort.store(true, std::memory_order_relaxed);
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace tep
