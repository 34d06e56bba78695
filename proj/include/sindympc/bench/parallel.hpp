#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sindympc::bench {

/// Runs body(i) for i in [0, count) on at most `jobs` threads. jobs <= 1 runs serially in index order.
/// The first exception thrown by any task is rethrown after all workers have stopped.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& body)
{
    if (count <= 0) return;
    if (jobs <= 1 || count == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    const int workers = std::min(jobs, count);
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace sindympc::bench
