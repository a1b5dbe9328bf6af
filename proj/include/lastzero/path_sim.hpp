// Path simulation, last-zero reconstruction, stopping rules and Monte Carlo
// estimators.
//
// Paths are generated segment by segment. A segment runs from one epoch to
// the next (grid epochs at spacing dt merged with jump epochs); inside it the
// process is a Brownian bridge (or a straight line without a Gaussian part).
// All randomness is drawn from counter-based streams keyed by
// (master_seed, path_index), so results do not depend on thread scheduling.
#pragma once

#include "lastzero/boundary_curve.hpp"
#include "lastzero/levy_model.hpp"
#include "lastzero/rng.hpp"
#include "lastzero/scale_kit.hpp"
#include "lastzero/sim_budget.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lastzero {

struct PathSkeleton {
    std::vector<double> times;         // times[0] = 0
    std::vector<double> values;        // X at the epoch, after any jump
    std::vector<double> left_values;   // X just before the epoch
    std::vector<std::uint8_t> jump_flags;
    double x0 = 0.0;
    double sigma = 0.0;
    double drift = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    // Filled by detect_zero_crossings.
    bool augmented = false;
    std::vector<double> segment_min;     // [i]: infimum over [t_{i-1}, t_i), i >= 1
    std::vector<double> crossing_times;  // epochs at which X returns to 0
    double last_nonpositive = 0.0;       // sup{t <= T : X_t <= 0}, 0 if none
};

// One inter-epoch piece of a path.
struct Segment {
    std::uint64_t index = 0;
    double t0 = 0.0, t1 = 0.0;
    double x0 = 0.0;        // value at t0
    double x1 = 0.0;        // left limit at t1
    double x1_after = 0.0;  // value at t1 (after a jump, if any)
    bool jump = false;
    double min = 0.0;       // infimum of the continuous part on [t0, t1]
};

// Infimum of a Brownian bridge from a to b with variance var = sigma^2 * dt,
// by inversion of P(min <= m) = exp(-2 (a-m)(b-m) / var) at uniform u.
inline double bridge_minimum(double a, double b, double var, double u)
{
    double d = a - b;
    return 0.5 * ((a + b) - std::sqrt(d * d - 2.0 * var * std::log(u)));
}

class PathWalker {
public:
    // Uniform grid of spacing dt on [0, horizon].
    PathWalker(const LevyModel& model, double x0, double horizon, double dt, std::uint64_t seed,
               std::uint64_t path_index);
    // Explicit increasing epoch grid starting at 0.
    PathWalker(const LevyModel& model, double x0, const std::vector<double>& grid, std::uint64_t seed,
               std::uint64_t path_index);

    bool next(Segment& seg);
    double time() const { return t_; }
    double value() const { return x_; }
    // Index of the grid epoch most recently reached (t == grid time).
    std::int64_t grid_index() const { return k_; }
    bool at_grid_epoch() const { return at_grid_; }
    // Segment minima are exact whenever they may fall below this level;
    // otherwise the smaller endpoint is reported.
    void set_min_level(double level) { min_level_ = level; }

private:
    double grid_time(std::int64_t k) const;

    const LevyModel* model_;
    double horizon_, dt_;
    const std::vector<double>* grid_ = nullptr;
    CounterRng inc_, jumps_, mins_;
    double t_, x_;
    double next_jump_;
    std::int64_t k_ = 0;
    std::uint64_t seg_ = 0;
    bool at_grid_ = true;
    double min_level_ = 0.0;
};

PathSkeleton simulate_skeleton(const LevyModel& model, double x0, double horizon, double dt,
                               std::uint64_t seed, std::uint64_t path_index = 0);

// Samples a bridge minimum per segment and records returns to zero.
PathSkeleton detect_zero_crossings(PathSkeleton skel);

struct LastZero {
    double g_hat = 0.0;
    double tail_bound = 0.0;  // 1 - psi'(0+) W(X_T)
};
LastZero last_zero(const PathSkeleton& skel, const ScaleFamily& fam);

class StoppingRule {
public:
    enum class Kind { Immediate, Barrier, Boundary, Oracle };

    static StoppingRule immediate();
    static StoppingRule barrier(double a);
    static StoppingRule boundary(std::shared_ptr<const BoundaryCurve> curve);
    static StoppingRule oracle();

    Kind kind() const { return kind_; }
    double level() const { return level_; }
    const BoundaryCurve* curve() const { return curve_.get(); }
    // Threshold b(U); for a barrier the constant level.
    double threshold(double u) const { return kind_ == Kind::Barrier ? level_ : (*curve_)(u); }
    std::string label() const;

private:
    Kind kind_ = Kind::Immediate;
    double level_ = 0.0;
    std::shared_ptr<const BoundaryCurve> curve_;
};

struct StoppingOutcome {
    double tau = 0.0;
    bool censored = false;
    double g_hat = 0.0;
    double u_at_tau = 0.0;
    double x_at_tau = 0.0;
    double censor_prob_bound = 0.0;
};

StoppingOutcome apply_rule(const PathSkeleton& skel, const StoppingRule& rule, const ScaleFamily& fam);

struct MCEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::int64_t n_paths = 0;
    std::uint64_t master_seed = 0;
    double censored_fraction = 0.0;
    bool unreliable = false;
};

// E|tau - g|^p for each rule, all rules evaluated on the same paths.
std::vector<MCEstimate> estimate_prediction_errors(const LevyModel& model, const std::vector<StoppingRule>& rules,
                                                   const MomentOrder& p, double x0, const SimBudget& budget);
MCEstimate estimate_prediction_error(const LevyModel& model, const StoppingRule& rule, const MomentOrder& p,
                                     double x0, const SimBudget& budget);

class Functional {
public:
    enum class Kind {
        LaplaceG,           // E_x exp(-q g)
        ExitUpBeforeDown,   // P_x(tau_a^+ < tau_0^-)
        RuinProb,           // P_x(tau_0^- < horizon)
        GCdf,               // P_x(g <= gamma)
        MeanDrift,          // (X_T - x)/T
        JumpCount,          // N_T
        ExitTimeInterval,   // E_x(tau_a^+ ^ tau_0^-)
        IntegralToUpCrossing,  // E_x int_0^{tau_0^+} f(X_s) ds, x < 0
        ValueUnderRule,     // E_{u,x} int_0^{tau_D} G(U_s, X_s) ds
    };

    static Functional laplace_g(double q, double x = 0.0);
    static Functional exit_up_before_down(double x, double a);
    static Functional ruin_prob(double x);
    static Functional g_cdf(double x, double gamma);
    static Functional mean_drift(double x = 0.0);
    static Functional jump_count();
    static Functional exit_time_interval(double x, double a);
    static Functional integral_to_up_crossing(double x, std::function<double(double)> f);
    static Functional value_under_rule(double u, double x, StoppingRule rule,
                                       std::function<double(double, double)> gain);

    Kind kind = Kind::LaplaceG;
    double x = 0.0;
    double param = 0.0;  // q, a or gamma
    double u = 0.0;
    std::function<double(double)> f1;
    std::function<double(double, double)> f2;
    std::shared_ptr<StoppingRule> rule;
};

MCEstimate estimate_functional(const LevyModel& model, const Functional& fn, const SimBudget& budget);

// Level above which a return to (-inf, 0] has probability below eps.
double safe_level(const ScaleFamily& fam, double eps = 1e-12);

// Runs body(i) for i in [0, n) across threads; body writes only to slot i.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body);

}  // namespace lastzero
