#include "lastzero/stopping_core.hpp"

#include <doctest.h>

using namespace lastzero;

TEST_CASE("gain and h for Brownian drift")
{
    GainSpec s(LevyModel::brownian_drift(0.5, 1.0), MomentOrder(2.0));
    CHECK(s.eg_p() == doctest::Approx(48.0));
    CHECK(gain(s, 0.0, 0.0) == doctest::Approx(-4.0));
    double prev = 1e300;
    for (double u : {0.01, 0.1, 1.0, 10.0, 50.0}) {
        double h = h_curve(s, u);
        CHECK(h > 0.0);
        CHECK(h <= prev);
        CHECK(gain(s, u, h) == doctest::Approx(0.0).scale(1.0));
        prev = h;
    }
    CHECK(u_h_star(s).is_infinite());
    CHECK(solve_u_b(s, -16.0).is_infinite());
}

TEST_CASE("value conversion")
{
    GainSpec s(LevyModel::brownian_drift(0.5, 1.0), MomentOrder(2.0));
    CHECK(value_conversion(s, -16.5) == doctest::Approx(15.0));
}

TEST_CASE("V(0,x) on the negative half-line is continuous at zero")
{
    GainSpec s(LevyModel::brownian_drift(0.5, 1.0), MomentOrder(2.0));
    CHECK(v0_on_negatives(s, -16.5, 0.0) == doctest::Approx(-16.5));
    CHECK(v0_on_negatives(s, -16.5, -1.0) < -16.5);
}

TEST_CASE("Cramer-Lundberg cutoff")
{
    GainSpec s(LevyModel::cramer_lundberg(1.5, 1.0, 1.0), MomentOrder(2.0));
    CHECK(s.eg_p() == doctest::Approx(240.0));
    CHECK(u_h_star(s).value() == doctest::Approx(24.0));
    CHECK(h_curve(s, 0.1) == doctest::Approx(16.2497530711).epsilon(1e-9));
    CHECK(h_curve(s, 30.0) == 0.0);
    CHECK(negative_landing_value(s, -1.0) == doctest::Approx(-29.0));
    double ub = solve_u_b(s, -60.0).value();
    CHECK(u_b_residual(s, -60.0, ub).value() == doctest::Approx(0.0).scale(1.0));
    CHECK(u_b_residual(s, -60.0, 0.9 * ub).value() < 0.0);
    CHECK(u_b_residual(s, -60.0, 1.1 * ub).value() > 0.0);
}

TEST_CASE("jump diffusion h")
{
    GainSpec s(LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0), MomentOrder(2.0));
    CHECK(s.eg_p() == doctest::Approx(2.4375));
    CHECK(h_curve(s, 0.01) == doctest::Approx(7.84).epsilon(1e-3));
}
