#include "smj/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace smj {

unsigned thread_count() {
    if (const char* env = std::getenv("SMJ_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(uint64_t n, const std::function<void(uint64_t)>& fn) {
    unsigned workers = std::min<uint64_t>(thread_count(), n);
    if (workers <= 1) {
        for (uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<uint64_t> next{0};
    const uint64_t chunk = std::max<uint64_t>(1, n / (8 * workers));
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (;;) {
                    uint64_t begin = next.fetch_add(chunk);
                    if (begin >= n) return;
                    uint64_t end = std::min(n, begin + chunk);
                    for (uint64_t i = begin; i < end; ++i) fn(i);
                }
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);  // drain remaining work
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace smj
