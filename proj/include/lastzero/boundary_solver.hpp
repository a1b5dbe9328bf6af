// Optimal boundary b(u), anchor V(0,0) and the value surface V(u,x).
//
// BrownianDrift uses the Gaussian kernel H. The jump families use Monte Carlo
// tables of the process killed below zero (started at 0 and shifted by x),
// built once from common random numbers so the fixed-point map is
// deterministic given the seed.
#pragma once

#include "lastzero/boundary_curve.hpp"
#include "lastzero/stopping_core.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lastzero {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double u_min = 1e-2;
    double u_max = 50.0;
    int n_u = 60;
    int r_nodes = 12;          // Gauss-Legendre nodes per r-panel
    double r_max = 600.0;      // r-integral truncation
    double damping = 0.5;      // accepted but unused: the sweep and the bracketed V(0,0) closures need no relaxation
    double tol_fixed_point = 1e-8;
    double tol_smooth_fit = 1e-2;  // reported as smooth_fit_ok; does not stop the solve
    int max_outer = 80;
    int max_inner = 200;
    double fd_step = 1e-3;
    double v00_tol = 1e-6;
    // jump families
    std::int64_t mc_kernel_paths = 20000;
    std::uint64_t seed = 20240601;
    double x_max = 0.0;        // spatial extent of the tables; 0 = automatic
    double table_dx = 0.0;     // spatial step; 0 = automatic
    double s_max = 0.0;        // time horizon of the tables; 0 = automatic
    int threads = 0;

    // Defaults adapted to the family of the model.
    static SolverConfig defaults_for(const LevyModel& model);
    void check() const;
};

// Gaussian kernel for BrownianDrift, p = 2:
// H(r,t,x,b) = int_0^b G(r+t, z) P(x + X_r in dz).
double kernel_H(const GainSpec& spec, double r, double t, double x, double b);

// Killed-process tables. For start level x_j = j*dx and time s_k, the sums
// over surviving paths (inf_{[0,s]} X > -x_j) of psi'(0+)W(z), E_z(g^(p-1))
// and exp(-rho z), restricted to z = x_j + X_s < b, plus the total of
// exp(-rho z) over survivors.
class KernelTables {
public:
    struct Terms {
        double aw = 0.0, ag = 0.0, ae = 0.0;  // restricted to z < b
        double e_total = 0.0;                 // all survivors
        double f2() const { return e_total - ae; }
    };

    KernelTables(const GainSpec& spec, const std::vector<double>& s_grid, double dx, int n_x,
                 std::int64_t n_paths, std::uint64_t seed, int threads = 0);

    Terms at(size_t k, size_t j, double b) const;

    const std::vector<double>& s_grid() const { return s_; }
    const std::vector<double>& s_weights() const { return w_; }
    double dx() const { return dx_; }
    int n_x() const { return n_x_; }
    double x(size_t j) const { return dx_ * static_cast<double>(j); }
    std::int64_t n_paths() const { return n_paths_; }

private:
    size_t cell(size_t k, size_t j) const { return (k * static_cast<size_t>(n_x_) + j) * static_cast<size_t>(n_x_ + 1); }

    std::vector<double> s_, w_;
    double dx_;
    int n_x_;
    std::int64_t n_paths_;
    // cumulative sums over z-bins [0, m*dx), m = 0..n_x
    std::vector<float> cw_, cg_, ce_;
    std::vector<double> etot_;
};

struct KernelEstimate {
    double f1 = 0.0, f1_se = 0.0;
    double f2 = 0.0, f2_se = 0.0;
};

// F1(b,s,u,x) = E[(u+s) psi'W(z) - E_z(g) + K e^{-rho z}; z < b, alive]
// and F2(b,s,x) = E[e^{-rho z}; z >= b, alive] with z = x + X_s, for a
// jump family with p = 2. K is the negative-landing value at v00.
KernelEstimate kernel_F1_F2(const GainSpec& spec, double b, double s, double u, double x, double v00,
                            std::int64_t n_paths, std::uint64_t seed);

class ValueSurface {
public:
    virtual ~ValueSurface() = default;

    // V(u, x); V(0, x) for x <= 0.
    virtual double operator()(double u, double x) const = 0;
    // int_0^b V(u, y) lambda rho e^{rho y} dy; zero without jumps.
    virtual double script_v(double u, double b) const = 0;

    const GainSpec& spec() const { return spec_; }
    const BoundaryCurve& curve() const { return curve_; }
    double v00() const { return curve_.v00(); }
    double fd_step() const { return fd_step_; }

protected:
    ValueSurface(GainSpec spec, BoundaryCurve curve, double fd_step)
        : spec_(std::move(spec)), curve_(std::move(curve)), fd_step_(fd_step) {}

    GainSpec spec_;
    BoundaryCurve curve_;
    double fd_step_;
};

// V(u, x) for BrownianDrift under an arbitrary curve.
double value_bm(const GainSpec& spec, const BoundaryCurve& curve, double u, double x, const SolverConfig& cfg);

// Surface backed by the Gaussian kernel; any curve may be supplied.
std::shared_ptr<ValueSurface> make_bm_surface(const GainSpec& spec, const BoundaryCurve& curve,
                                              const SolverConfig& cfg);

// int_0^b V(u,y) lambda rho e^{rho y} dy on a surface.
double script_V(const ValueSurface& surface, double u, double b);

struct SolverDiagnostics {
    int outer_iterations = 0;
    int inner_iterations = 0;
    std::vector<double> v00_history;
    std::vector<double> outer_residuals;
    double derivative_target = 0.0;      // required dV+/dx at (0,0)
    double derivative_estimate = 0.0;    // achieved
    std::vector<double> smooth_fit;      // per grid u
    double max_smooth_fit = 0.0;
    double max_reflected_term = 0.0;     // BrownianDrift: |reflected part| at (u, b(u))
    int h_floor_nodes = 0;               // nodes where b = h
    double max_monotonicity_violation = 0.0;
    std::int64_t kernel_paths = 0;
    std::string closure;                 // how V(0,0) was fixed
};

struct Solution {
    BoundaryCurve curve;
    std::shared_ptr<ValueSurface> surface;
    SolverDiagnostics diagnostics;
};

// Throws SolverError on non-convergence.
Solution solve(const GainSpec& spec, const SolverConfig& cfg);

// One-sided finite-difference slope of V(u, .) at b(u)-, scaled by the mean
// slope |V(u, b - 0.5)| / 0.5. Requires b(u) > 0.
double smooth_fit_residual(const ValueSurface& surface, double u);

// G(u,x) + int V(u, x+y) Pi(dy) for x > b(u).
double lambda_positivity_check(const ValueSurface& surface, double u, double x);

}  // namespace lastzero
