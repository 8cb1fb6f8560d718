#pragma once

// Order-fixed parallel map over trajectory indices. Workers pull indices
// from an atomic counter; results land in their index slot, so any reduction
// done afterwards in index order is independent of the worker count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sns {

/// SNS_WORKERS overrides the requested count when set to a positive integer.
inline std::size_t resolve_workers(std::size_t requested) {
    if (const char* env = std::getenv("SNS_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, requested);
}

template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, std::size_t workers, Fn&& fn) {
    std::vector<R> out(count);
    workers = std::min(std::max<std::size_t>(1, workers), std::max<std::size_t>(1, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace sns
