#include "lastzero/path_sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace lastzero;

TEST_CASE("bridge minimum lies below both endpoints")
{
    for (double u : {1e-6, 0.3, 0.999999}) CHECK(bridge_minimum(1.0, 0.5, 0.01, u) <= 0.5);
    CHECK(bridge_minimum(1.0, 0.5, 0.01, 1.0 - 1e-16) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("counter-based streams are reproducible and disjoint")
{
    CounterRng a(7, 3, Stream::Increments), b(7, 3, Stream::Increments), c(7, 3, Stream::Jumps);
    for (int i = 0; i < 5; ++i) {
        double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x != c.uniform());
    }
    CHECK(a.uniform_at(2) == CounterRng(7, 3, Stream::Increments).uniform_at(2));
}

TEST_CASE("skeleton: grid, jumps and determinism")
{
    auto m = LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0);
    PathSkeleton s1 = simulate_skeleton(m, 0.0, 5.0, 0.01, 11, 4);
    PathSkeleton s2 = simulate_skeleton(m, 0.0, 5.0, 0.01, 11, 4);
    CHECK(s1.values == s2.values);
    CHECK(s1.times.front() == 0.0);
    CHECK(s1.times.back() == doctest::Approx(5.0));
    for (size_t i = 1; i < s1.times.size(); ++i) CHECK(s1.times[i] > s1.times[i - 1]);
}

TEST_CASE("oracle and immediate rules")
{
    auto m = LevyModel::brownian_drift(0.5, 1.0);
    SimBudget b;
    b.n_paths = 4000;
    b.threads = 1;
    auto e = estimate_prediction_errors(m, {StoppingRule::oracle(), StoppingRule::immediate()}, MomentOrder(2.0), 0.0, b);
    CHECK(e[0].mean < 1e-3);
    CHECK(std::abs(e[1].mean - 48.0) < 4.0 * e[1].stderr_mean);
    CHECK(e[1].n_paths == 4000);
}

TEST_CASE("estimates do not depend on the thread count")
{
    auto m = LevyModel::cramer_lundberg(1.5, 1.0, 1.0);
    SimBudget b;
    b.n_paths = 3000;
    b.threads = 1;
    auto e1 = estimate_functional(m, Functional::ruin_prob(1.0), b);
    b.threads = 3;
    auto e3 = estimate_functional(m, Functional::ruin_prob(1.0), b);
    CHECK(e1.mean == e3.mean);
    CHECK(e1.stderr_mean == e3.stderr_mean);
}

TEST_CASE("two-sided exit agrees with W(x)/W(a)")
{
    auto m = LevyModel::brownian_drift(0.5, 1.0);
    ScaleFamily f(m);
    SimBudget b;
    b.n_paths = 20000;
    b.threads = 1;
    auto e = estimate_functional(m, Functional::exit_up_before_down(1.0, 2.0), b);
    CHECK(std::abs(e.mean - f.w(1.0) / f.w(2.0)) < 4.0 * e.stderr_mean);
}

TEST_CASE("rule labels")
{
    CHECK(StoppingRule::barrier(1.5).label() == "barrier:1.5");
    CHECK(StoppingRule::immediate().label() == "immediate");
}
