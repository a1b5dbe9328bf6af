#include "lastzero/boundary_solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace lastzero;

TEST_CASE("config checks")
{
    SolverConfig c;
    c.damping = 0.0;
    CHECK_THROWS(c.check());
    auto cl = SolverConfig::defaults_for(LevyModel::cramer_lundberg(1.5, 1.0, 1.0));
    CHECK(cl.u_max > 300.0);
}

TEST_CASE("Gaussian kernel is a sub-probability integral of G")
{
    GainSpec s(LevyModel::brownian_drift(0.5, 1.0), MomentOrder(2.0));
    CHECK(kernel_H(s, 1.0, 1.0, 0.5, 0.0) == 0.0);
    double a = kernel_H(s, 0.5, 1.0, 0.5, 2.0), b = kernel_H(s, 0.5, 1.0, 0.5, 3.0);
    CHECK(std::isfinite(a));
    CHECK(a != b);
}

TEST_CASE("Brownian drift solve: anchor, structure and the value surface")
{
    GainSpec s(LevyModel::brownian_drift(0.5, 1.0), MomentOrder(2.0));
    SolverConfig cfg = SolverConfig::defaults_for(s.model());
    cfg.n_u = 30;
    Solution sol = solve(s, cfg);
    const BoundaryCurve& c = sol.curve;
    CHECK(c.v00() < 0.0);
    CHECK(c.v00() >= -24.0);
    for (size_t i = 0; i < c.u_grid().size(); ++i) {
        CHECK(c.b_values()[i] >= c.h_values()[i] - 1e-12);
        if (i > 0) CHECK(c.b_values()[i] <= c.b_values()[i - 1]);
    }
    const ValueSurface& v = *sol.surface;
    CHECK(v(0.0, 0.0) == doctest::Approx(c.v00()).epsilon(1e-6));
    CHECK(v(1.0, c(1.0) + 0.5) == 0.0);
    CHECK(v(1.0, 0.5 * c(1.0)) < 0.0);
    CHECK(v(0.0, -1.0) == doctest::Approx(v0_on_negatives(s, c.v00(), -1.0)));
    // the curve round-trips through boundary.csv
    BoundaryCurve back = BoundaryCurve::from_csv(c.to_csv());
    CHECK(back.u_grid().size() == c.u_grid().size());
    CHECK(back(2.0) == doctest::Approx(c(2.0)).epsilon(1e-10));
}

TEST_CASE("jump-family kernel estimates")
{
    GainSpec s(LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0), MomentOrder(2.0));
    KernelEstimate a = kernel_F1_F2(s, 2.0, 0.5, 1.0, 0.5, -0.5, 2000, 5);
    KernelEstimate b = kernel_F1_F2(s, 2.0, 0.5, 1.0, 0.5, -0.5, 2000, 5);
    CHECK(a.f1 == b.f1);
    CHECK(a.f2 >= 0.0);
    CHECK(a.f2 <= 1.0);
}
