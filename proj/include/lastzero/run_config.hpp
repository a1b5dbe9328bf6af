// Run configuration: flat key=value text with section prefixes.
//
//   model.family = brownian_drift | jump_diffusion | cramer_lundberg
//   model.mu, model.sigma, model.lambda, model.rho, model.c
//   p
//   solver.<SolverConfig field>
//   sim.n_paths, sim.horizon, sim.dt, sim.master_seed, sim.threads
//   value.u (comma list), value.x_min, value.x_max, value.n_x
//   validate.tolerance_scale
//   output.dir
//
// '#' starts a comment. Unknown keys and repeated keys are errors.
#pragma once

#include "lastzero/boundary_solver.hpp"
#include "lastzero/levy_model.hpp"
#include "lastzero/sim_budget.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lastzero {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ValueGrid {
    std::vector<double> u{0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
    double x_min = -2.0;
    double x_max = 0.0;  // 0: 1.1 * b(u_min)
    int n_x = 81;
};

struct RunConfig {
    LevyModel model = LevyModel::brownian_drift(0.5, 1.0);
    MomentOrder p{2.0};
    SolverConfig solver;
    SimBudget sim;
    ValueGrid value;
    double tolerance_scale = 1.0;
    std::string output_dir = ".";

    // Throws ConfigError on syntax errors, unknown keys or bad numbers,
    // ModelError on parameters outside the model's domain.
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);

    // Defaults for a family (spec examples), usable without a file.
    static RunConfig defaults(Family f);
};

Family parse_family(const std::string& name);

}  // namespace lastzero
