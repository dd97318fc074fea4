#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace equiflow {

// Error taxonomy, mapped to CLI exit codes (usage=2, data=3, solver=4).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NegativeCycleError : SolverError {
    explicit NegativeCycleError(std::vector<int> cycle)
        : SolverError("negative-cost cycle in shortest-path subproblem; use an acyclic "
                      "(extended or time-expanded) network configuration"),
          cycle_arcs(std::move(cycle)) {}
    std::vector<int> cycle_arcs;
};

// Runs fn(i) for i in [0, n). Work items are independent; callers write
// results into preallocated per-index slots, so the schedule never affects
// the outcome. threads <= 1 runs inline.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += nw) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace equiflow
