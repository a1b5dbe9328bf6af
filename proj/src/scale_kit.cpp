#include "lastzero/scale_kit.hpp"

#include "lastzero/path_sim.hpp"

#include <algorithm>
#include <cmath>

namespace lastzero {

namespace {

// Real roots of a x^2 + b x + c, numerically stable.
void quadratic_roots(double a, double b, double c, std::vector<double>& out)
{
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw NumericError("scale function: complex roots of psi(beta) = q");
    double sq = std::sqrt(disc);
    double t = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    if (t == 0.0) {
        out.push_back(0.0);
        out.push_back(0.0);
        return;
    }
    out.push_back(t / a);
    out.push_back(c / t);
}

double psi_minimum(const LevyModel& m)
{
    double a = m.has_jumps() ? -m.rho() * (1.0 - 1e-12) : -1.0;
    if (!m.has_jumps())
        while (m.psi_prime(a) > 0.0) a *= 2.0;
    double b = bisect_root([&m](double x) { return m.psi_prime(x); }, a, 0.0, 1e-14);
    return m.psi(b);
}

}  // namespace

ScaleFamily::ScaleFamily(const LevyModel& model) : model_(model) { roots0_ = roots(0.0); }

ScaleRoots ScaleFamily::roots(double q) const
{
    const LevyModel& m = model_;
    std::vector<double> r;
    switch (m.family()) {
    case Family::BrownianDrift: {
        double s2 = m.sigma() * m.sigma(), mu = m.drift();
        double sq = std::sqrt(mu * mu + 2.0 * s2 * q);
        r.push_back(2.0 * q / (mu + sq));
        r.push_back((-mu - sq) / s2);
        break;
    }
    case Family::CramerLundberg: {
        double c = m.drift(), lam = m.lambda(), rho = m.rho();
        quadratic_roots(c, c * rho - q - lam, -q * rho, r);
        if (q == 0.0) { r = {0.0, -(rho - lam / c)}; }
        break;
    }
    case Family::JumpDiffusion: {
        double a = 0.5 * m.sigma() * m.sigma(), mu = m.drift(), lam = m.lambda(), rho = m.rho();
        double b = mu + a * rho, c = mu * rho - q - lam;
        double r1 = m.phi(q);
        r.push_back(r1);
        double b2 = b + a * r1;
        double c2 = c + b2 * r1;
        quadratic_roots(a, b2, c2, r);
        break;
    }
    }
    std::sort(r.begin(), r.end(), std::greater<>());
    ScaleRoots out;
    out.beta = r;
    for (double b : r) out.weight.push_back(1.0 / m.psi_prime(b));
    return out;
}

double ScaleFamily::w(double x) const { return wq(0.0, x); }

double ScaleFamily::w_prime(double x) const
{
    if (x < 0.0) return 0.0;
    if (x == 0.0 && !model_.infinite_variation())
        throw NumericError("W'(0) is one-sided for finite-variation models; use x > 0");
    return wq_prime(0.0, x);
}

double ScaleFamily::w_second(double x) const
{
    if (x < 0.0) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < roots0_.beta.size(); ++i) {
        double b = roots0_.beta[i];
        s += b * b * roots0_.weight[i] * std::exp(b * x);
    }
    return s;
}

double ScaleFamily::w_at_zero() const { return model_.infinite_variation() ? 0.0 : 1.0 / model_.drift(); }

double ScaleFamily::wq(double q, double x) const
{
    if (x < 0.0) return 0.0;
    if (x == 0.0) return w_at_zero();
    const ScaleRoots& rt = q == 0.0 ? roots0_ : roots(q);
    double s = 0.0;
    for (size_t i = 0; i < rt.beta.size(); ++i) s += rt.weight[i] * std::exp(rt.beta[i] * x);
    return s;
}

double ScaleFamily::wq_prime(double q, double x) const
{
    if (x < 0.0) return 0.0;
    ScaleRoots tmp;
    const ScaleRoots& rt = q == 0.0 ? roots0_ : (tmp = roots(q));
    double s = 0.0;
    for (size_t i = 0; i < rt.beta.size(); ++i) s += rt.beta[i] * rt.weight[i] * std::exp(rt.beta[i] * x);
    return s;
}

double ScaleFamily::zq(double q, double x) const
{
    if (x <= 0.0 || q == 0.0) return 1.0;
    ScaleRoots rt = roots(q);
    double s = 0.0;
    for (size_t i = 0; i < rt.beta.size(); ++i) s += rt.weight[i] * std::expm1(rt.beta[i] * x) / rt.beta[i];
    return 1.0 + q * s;
}

double ScaleFamily::w_conv2(double x) const
{
    if (x <= 0.0) return 0.0;
    // inverse transform of (sum_i a_i / (beta - beta_i))^2
    const auto& b = roots0_.beta;
    const auto& a = roots0_.weight;
    double s = 0.0;
    for (size_t i = 0; i < b.size(); ++i) {
        s += a[i] * a[i] * x * std::exp(b[i] * x);
        for (size_t j = 0; j < b.size(); ++j) {
            if (j == i) continue;
            s += a[i] * a[j] * (std::exp(b[i] * x) - std::exp(b[j] * x)) / (b[i] - b[j]);
        }
    }
    return s;
}

double ScaleFamily::w_conv2_quadrature(double x) const
{
    if (x <= 0.0) return 0.0;
    auto f = [this, x](double y) { return w(y) * w(x - y); };
    return integrate(f, 0.0, x, 1e-13, 1e-12).value;
}

double ScaleFamily::g_laplace(double q, double x) const
{
    double mp = model_.psi_prime(0.0);
    if (q == 0.0) return 1.0;
    ScaleRoots rt = roots(q);
    // exp(Phi(q) x) Phi'(q) cancels the leading term of W^(q)
    double lead = rt.weight[0];  // Phi'(q) = 1/psi'(Phi(q))
    if (x < 0.0) return mp * lead * std::exp(rt.beta[0] * x);
    double rest = 0.0;
    for (size_t i = 1; i < rt.beta.size(); ++i) rest += rt.weight[i] * std::exp(rt.beta[i] * x);
    if (x == 0.0 && model_.infinite_variation()) return mp * lead;
    return mp * (w(x) - rest);
}

Quantity ScaleFamily::g_cdf(double x, double gamma, const SimBudget& budget) const
{
    if (gamma < 0.0) throw NumericError("g_cdf: gamma must be nonnegative");
    double mp = model_.psi_prime(0.0);
    Quantity out;
    if (gamma == 0.0) {
        out.value = x < 0.0 ? 0.0 : mp * w(x);
        return out;
    }
    if (model_.family() == Family::BrownianDrift) {
        double mu = model_.drift(), sig = model_.sigma();
        double kappa = 2.0 * mu / (sig * sig);
        double m = x + mu * gamma, s = sig * std::sqrt(gamma);
        out.value = normal_cdf(m / s) - std::exp(-kappa * x) * normal_cdf((x - mu * gamma) / s);
        return out;
    }
    auto est = estimate_functional(model_, Functional::g_cdf(x, gamma), budget);
    out.value = est.mean;
    out.se = est.stderr_mean;
    out.provenance = Provenance::MonteCarlo;
    return out;
}

double ScaleFamily::exg_moment(double x, double r) const
{
    if (!(r > 0.0) || std::floor(r) != r || r > 4.0)
        throw NumericError("exg_moment: only integer orders 1..4 are implemented");
    if (r == 1.0) {
        double mp = model_.psi_prime(0.0);
        auto [p1, p2] = model_.phi_derivatives_at_zero();
        double v = -mp * (p2 + x * p1 * p1);
        if (x > 0.0) v += mp * w_conv2(x);
        return v;
    }
    return exg_moment_fd(x, static_cast<int>(r));
}

double ScaleFamily::exg_moment_fd(double x, int r) const
{
    static const std::vector<std::vector<double>> coef = {
        {},
        {0.0, -0.5, 0.0, 0.5, 0.0},
        {0.0, 1.0, -2.0, 1.0, 0.0},
        {-0.5, 1.0, 0.0, -1.0, 0.5},
        {1.0, -4.0, 6.0, -4.0, 1.0},
    };
    double h0 = std::min(1e-2, 0.2 * std::abs(psi_minimum(model_)));
    std::vector<double> est;
    for (double h : {h0, 0.5 * h0, 0.25 * h0}) {
        double d = 0.0;
        for (int k = -2; k <= 2; ++k) {
            double c = coef[r][k + 2];
            if (c != 0.0) d += c * g_laplace(k * h, x);
        }
        est.push_back(d / std::pow(h, r));
    }
    double deriv = richardson(est, 2, 2);
    return (r % 2 == 0 ? 1.0 : -1.0) * deriv;
}

Quantity ScaleFamily::g_pth_moment(const MomentOrder& order, const SimBudget& budget) const
{
    double p = order.p();
    Quantity out;
    if (model_.family() == Family::BrownianDrift) {
        // g ~ Gamma(1/2, scale 2 sigma^2/mu^2) under P_0
        double mu = model_.drift(), sig = model_.sigma();
        double a = 2.0 * sig * sig / (mu * mu);
        out.value = std::pow(a, p) * std::exp(std::lgamma(p + 0.5) - std::lgamma(0.5));
        return out;
    }
    if (order.is_integer() && p <= 4.0) {
        out.value = exg_moment(0.0, p);
        out.provenance = p == 1.0 ? Provenance::ClosedForm : Provenance::Quadrature;
        return out;
    }
    auto est = estimate_prediction_error(model_, StoppingRule::immediate(), order, 0.0, budget);
    out.value = est.mean;
    out.se = est.stderr_mean;
    out.provenance = Provenance::MonteCarlo;
    return out;
}

double ScaleFamily::potential_density(PotentialKind kind, double a, double q, double x, double y) const
{
    switch (kind) {
    case PotentialKind::KilledInterval: {
        if (!(a > 0.0) || x < 0.0 || x > a || y < 0.0 || y > a)
            throw NumericError("potential_density: interval kind needs x, y in [0, a]");
        return wq(q, x) * wq(q, a - y) / wq(q, a) - wq(q, x - y);
    }
    case PotentialKind::KilledHalfline: {
        if (x > a || y > a) throw NumericError("potential_density: halfline kind needs x, y <= a");
        return std::exp(-model_.phi(q) * (a - x)) * wq(q, a - y) - wq(q, x - y);
    }
    case PotentialKind::Free: {
        double ph = model_.phi(q);
        return model_.phi_prime(q) * std::exp(-ph * (y - x)) - wq(q, x - y);
    }
    }
    return 0.0;
}

double ScaleFamily::mean_overall_infimum() const
{
    return model_.psi_second(0.0) / (2.0 * model_.psi_prime(0.0));
}

}  // namespace lastzero
