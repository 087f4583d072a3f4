#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lpakit {

/// Worker count from LPAKIT_JOBS, or 1.
inline int default_jobs() {
    if (const char* env = std::getenv("LPAKIT_JOBS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

/// Applies `fn` to every item on up to `jobs` threads. Results keep input
/// order; the first exception thrown by any item is rethrown.
template <class T, class Fn>
auto parallel_map(const std::vector<T>& items, Fn fn, int jobs) -> std::vector<decltype(fn(items.front()))> {
    using R = decltype(fn(items.front()));
    std::vector<R> out(items.size());
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < items.size(); ++i) out[i] = fn(items[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            try {
                out[i] = fn(items[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace lpakit
