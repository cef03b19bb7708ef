#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace plattice {

// Replicate-level parallel loop. Each index is independent work writing its
// own slot, so the result is identical for any thread count.
template <typename Fn>
void parallel_for(std::uint64_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    const int workers = int(std::min<std::uint64_t>(std::uint64_t(threads), n));
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mu;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace plattice
