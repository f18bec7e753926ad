#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gmeans {

/// Runs body(i) for i in [0, n) over contiguous chunks on worker threads.
/// Results must be written by index; the exception of the lowest failing
/// index is rethrown, so failures are as deterministic as the results.
template <class Body>
void parallel_for(std::size_t n, Body&& body)
{
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, n / 4));
    std::vector<std::exception_ptr> errors(n);
    const auto run = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t lo = 0; lo < n; lo += chunk) pool.emplace_back(run, lo, std::min(n, lo + chunk));
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace gmeans
