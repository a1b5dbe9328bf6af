// Scale functions W^(q), Z^(q) and the law of the last zero g.
//
// For all three families psi(beta) - q is a rational function whose numerator
// has simple real roots beta_i, so W^(q)(x) = sum_i exp(beta_i x) / psi'(beta_i)
// for x >= 0.
#pragma once

#include "lastzero/levy_model.hpp"
#include "lastzero/numerics.hpp"
#include "lastzero/sim_budget.hpp"

#include <vector>

namespace lastzero {

struct ScaleRoots {
    std::vector<double> beta;    // roots of psi(beta) = q, descending
    std::vector<double> weight;  // 1 / psi'(beta_i)
};

enum class PotentialKind { KilledInterval, KilledHalfline, Free };

class ScaleFamily {
public:
    explicit ScaleFamily(const LevyModel& model);

    const LevyModel& model() const { return model_; }
    const ScaleRoots& roots0() const { return roots0_; }
    ScaleRoots roots(double q) const;

    double w(double x) const;
    double w_prime(double x) const;   // x > 0, or 0+ for sigma > 0
    double w_second(double x) const;
    double w_at_zero() const;         // W(0): 0 or 1/c
    double w_infinity() const { return 1.0 / model_.psi_prime(0.0); }

    double wq(double q, double x) const;
    double wq_prime(double q, double x) const;
    double zq(double q, double x) const;

    double w_conv2(double x) const;             // closed form over the roots
    double w_conv2_quadrature(double x) const;  // direct convolution integral

    // E_x(exp(-q g)).
    double g_laplace(double q, double x) const;
    // P_x(g <= gamma): exact for BrownianDrift, simulated otherwise.
    Quantity g_cdf(double x, double gamma, const SimBudget& budget = {}) const;

    // E_x(g^r) for integer r >= 1 (r = 1 in closed form).
    double exg_moment(double x, double r) const;
    // E(g^p) under P_0.
    Quantity g_pth_moment(const MomentOrder& p, const SimBudget& budget = {}) const;

    // q-potential densities.
    //   KilledInterval: exit from [0, a]; KilledHalfline: exit from (-inf, a]; Free: a ignored.
    double potential_density(PotentialKind kind, double a, double q, double x, double y) const;

    // E(-inf_t X_t).
    double mean_overall_infimum() const;

private:
    LevyModel model_;
    ScaleRoots roots0_;
    double exg_moment_fd(double x, int r) const;
};

}  // namespace lastzero
