#include "lastzero/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace lastzero;

TEST_CASE("format_number: 12 digits, inf sentinel, NaN refused")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(ExtReal::infinity().to_string() == "inf");
    CHECK_THROWS_AS(format_number(NAN), NumericError);
}

TEST_CASE("ExtReal value() throws on infinity")
{
    CHECK_THROWS(ExtReal::infinity().value());
    CHECK(ExtReal(2.5).value() == 2.5);
    CHECK(ExtReal::infinity().value_or(7.0) == 7.0);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly")
{
    GaussLegendre gl = gauss_legendre(6);
    double s = 0.0;
    for (size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * std::pow(gl.x[i], 10);
    CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("adaptive quadrature")
{
    auto r = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
    auto t = integrate_to_infinity([](double x) { return std::exp(-2.0 * x); }, 0.0, 2.0);
    CHECK(t.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("root finders")
{
    auto f = [](double x) { return x * x - 2.0; };
    CHECK(brent_root(f, 0.0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(bisect_root(f, 0.0, 2.0, 1e-10) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK_THROWS(brent_root(f, 2.0, 3.0));
}

TEST_CASE("Richardson removes the leading error term")
{
    auto est = [](double h) { return 1.0 + 3.0 * h + 5.0 * h * h; };
    double r = richardson({est(0.1), est(0.05), est(0.025)}, 1, 1);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
}
