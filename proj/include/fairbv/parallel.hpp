#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fairbv {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes
// only its own output slot, so results do not depend on scheduling. The
// exception from the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    std::mutex m;
    std::exception_ptr first;
    std::size_t first_index = n;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (i < first_index) {
                    first_index = i;
                    first = std::current_exception();
                }
            }
        }
    };
    unsigned k = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    if (k <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < k; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace fairbv
