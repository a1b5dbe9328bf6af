#pragma once

#include <cstdint>

namespace lastzero {

// Monte Carlo resources shared by the simulator and the analytic modules that
// fall back on simulation.
struct SimBudget {
    std::int64_t n_paths = 100000;
    double horizon = 80.0;
    double dt = 1e-2;
    std::uint64_t seed = 20240601;
    int threads = 0;  // 0: hardware concurrency
};

}  // namespace lastzero
