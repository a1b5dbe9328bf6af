#include "lastzero/scale_kit.hpp"

#include <doctest.h>

#include <cmath>

using namespace lastzero;

TEST_CASE("Brownian scale function closed form")
{
    ScaleFamily f(LevyModel::brownian_drift(0.5, 1.0));
    for (double x : {0.1, 1.0, 3.0}) CHECK(f.w(x) == doctest::Approx(2.0 * (1.0 - std::exp(-x))));
    CHECK(f.w_at_zero() == 0.0);
    CHECK(f.w_infinity() == doctest::Approx(2.0));
    CHECK(f.w_prime(1.0) == doctest::Approx(2.0 * std::exp(-1.0)));
}

TEST_CASE("Laplace transform of W^(q) for every family")
{
    for (const LevyModel& m : {LevyModel::brownian_drift(0.5, 1.0), LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0),
                               LevyModel::cramer_lundberg(1.5, 1.0, 1.0)}) {
        ScaleFamily f(m);
        for (double q : {0.0, 1.0}) {
            double beta = m.phi(q) + 1.0;
            auto r = integrate_to_infinity([&](double x) { return std::exp(-beta * x) * f.wq(q, x); }, 0.0, 1.0,
                                           1e-12, 1e-11);
            CHECK(r.value == doctest::Approx(1.0 / (m.psi(beta) - q)).epsilon(1e-9));
        }
    }
}

TEST_CASE("finite variation: W(0) = 1/c")
{
    ScaleFamily f(LevyModel::cramer_lundberg(1.5, 1.0, 1.0));
    CHECK(f.w_at_zero() == doctest::Approx(1.0 / 1.5));
    CHECK(f.w(0.0) == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("last-zero moments and transform")
{
    ScaleFamily bm(LevyModel::brownian_drift(0.5, 1.0));
    CHECK(bm.g_laplace(1.0, 0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(bm.exg_moment(0.0, 1) == doctest::Approx(4.0));
    CHECK(bm.exg_moment(0.0, 2) == doctest::Approx(48.0));
    ScaleFamily cl(LevyModel::cramer_lundberg(1.5, 1.0, 1.0));
    CHECK(cl.exg_moment(0.0, 1) == doctest::Approx(8.0));
    CHECK(cl.exg_moment(0.0, 2) == doctest::Approx(240.0));
    ScaleFamily jd(LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0));
    CHECK(jd.exg_moment(0.0, 1) == doctest::Approx(0.75));
    CHECK(jd.exg_moment(0.0, 2) == doctest::Approx(2.4375));
    // moments agree with derivatives of the transform
    const double h = 1e-3;
    double d1 = (1.0 - jd.g_laplace(h, 0.5)) / h, d2 = (1.0 - jd.g_laplace(h / 2, 0.5)) / (h / 2);
    CHECK(jd.exg_moment(0.5, 1) == doctest::Approx(2.0 * d2 - d1).epsilon(1e-5));
}

TEST_CASE("W*W closed form matches the convolution integral")
{
    for (const LevyModel& m : {LevyModel::brownian_drift(0.5, 1.0), LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0),
                               LevyModel::cramer_lundberg(1.5, 1.0, 1.0)}) {
        ScaleFamily f(m);
        for (double x : {0.3, 2.0}) CHECK(f.w_conv2(x) == doctest::Approx(f.w_conv2_quadrature(x)).epsilon(1e-8));
    }
}
