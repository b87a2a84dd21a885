#pragma once

// Minimal fork-join helpers. Work is prepartitioned by index so results are
// deterministic regardless of scheduling; the first exception thrown by any
// worker is rethrown on the calling thread after the join.

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace regenmc {

/// Runs fn(i) for i = 0..n_items-1 on up to n_workers threads. Items are
/// claimed from a shared counter; fn must write any output through its own
/// index.
template <class Fn>
void parallel_for(unsigned n_workers, std::size_t n_items, Fn&& fn) {
    if (n_items == 0) return;
    if (n_workers <= 1 || n_items == 1) {
        for (std::size_t i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_items) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(n_workers, n_items));
    threads.reserve(count);
    for (unsigned w = 0; w < count; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace regenmc
