#include "lastzero/levy_model.hpp"

#include <doctest.h>

#include <cmath>

using namespace lastzero;

TEST_CASE("Laplace exponents")
{
    auto bm = LevyModel::brownian_drift(0.5, 1.0);
    CHECK(bm.psi(2.0) == doctest::Approx(3.0));
    CHECK(bm.psi_prime(0.0) == doctest::Approx(0.5));
    auto jd = LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0);
    CHECK(jd.psi(1.0) == doctest::Approx(3.0 + 0.5 - 0.5));
    CHECK(jd.psi_prime(0.0) == doctest::Approx(2.0));
    auto cl = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);
    CHECK(cl.psi(1.0) == doctest::Approx(1.0));
    CHECK(cl.psi_prime(0.0) == doctest::Approx(0.5));
    CHECK_FALSE(cl.infinite_variation());
    CHECK(jd.infinite_variation());
}

TEST_CASE("right inverse and its derivatives at zero")
{
    auto bm = LevyModel::brownian_drift(0.5, 1.0);
    CHECK(bm.phi(0.0) == doctest::Approx(0.0));
    CHECK(bm.phi(1.0) == doctest::Approx(1.0));
    auto [d1, d2] = bm.phi_derivatives_at_zero();
    CHECK(d1 == doctest::Approx(2.0));
    CHECK(d2 == doctest::Approx(-8.0));
    auto jd = LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0);
    CHECK(jd.phi_derivatives_at_zero().second == doctest::Approx(-0.375));
    for (const LevyModel& m : {bm, jd, LevyModel::cramer_lundberg(1.5, 1.0, 1.0)})
        for (double q : {0.3, 1.0, 4.0}) CHECK(m.psi(m.phi(q)) == doctest::Approx(q).epsilon(1e-12));
}

TEST_CASE("parameter domain and the moment gate")
{
    CHECK_THROWS_AS(LevyModel::brownian_drift(0.5, -1.0), ModelError);
    CHECK_THROWS_AS(MomentOrder(1.0), ModelError);
    auto bad = LevyModel::jump_diffusion(1.0, 1.0, 2.0, 1.0);
    Validation v = validate(bad, MomentOrder(2.0));
    CHECK_FALSE(v.ok);
    CHECK(v.clause == "drift");
    CHECK(validate(LevyModel::brownian_drift(0.5, 1.0), MomentOrder(2.0)).ok);
    CHECK(validate(LevyModel::cramer_lundberg(1.5, 1.0, 1.0), MomentOrder(3.0)).ok);
}

TEST_CASE("Levy density")
{
    auto jd = LevyModel::jump_diffusion(3.0, 1.0, 2.0, 1.5);
    CHECK(jd.levy_density(-1.0) == doctest::Approx(2.0 * 1.5 * std::exp(-1.5)));
    CHECK(jd.levy_density(0.5) == 0.0);
    CHECK(LevyModel::brownian_drift(1, 1).levy_density(-1.0) == 0.0);
}
