#include "lastzero/stopping_core.hpp"

#include <cmath>

namespace lastzero {

namespace {

Validation checked(const LevyModel& m, const MomentOrder& p)
{
    Validation v = validate(m, p);
    if (!v.ok) throw ModelError("model rejected (" + v.clause + "): " + v.reason);
    return v;
}

// Slowest decay rate of W'(u), used to cut the u-integral.
double w_decay_rate(const ScaleFamily& fam)
{
    const auto& b = fam.roots0().beta;
    return -b[1];
}

// int_[0,inf) f(u) W(du) with W(du) = W(0) delta_0 + W'(u) du.
template <class F>
double integrate_against_w(const ScaleFamily& fam, F&& f)
{
    double atom = fam.w_at_zero();
    double s = atom > 0.0 ? atom * f(0.0) : 0.0;
    auto dens = [&](double u) { return f(u) * fam.w_prime(u == 0.0 ? 1e-300 : u); };
    // polynomial growth of f: halve the nominal rate
    s += integrate_to_infinity(dens, 0.0, 0.5 * w_decay_rate(fam), 1e-12, 1e-10).value;
    return s;
}

}  // namespace

GainSpec::GainSpec(const LevyModel& model, const MomentOrder& p) : fam_((checked(model, p), model)), p_(p)
{
    eg_p_ = fam_.g_pth_moment(p_);
}

double GainSpec::eg_pm1(double x) const { return fam_.exg_moment(x, p_.p() - 1.0); }

double gain(const GainSpec& spec, double u, double x)
{
    double r = spec.p() - 1.0;
    double mp = spec.model().psi_prime(0.0);
    double up = r == 1.0 ? u : std::pow(u, r);
    return up * mp * spec.family().w(x) - spec.eg_pm1(x);
}

ExtReal threshold_T(const GainSpec& spec, double x)
{
    if (x < 0.0) throw NumericError("threshold_T: x must be nonnegative");
    double wx = spec.family().w(x);
    if (wx <= 0.0) return ExtReal::infinity();
    return ExtReal(spec.eg_pm1(x) / (spec.model().psi_prime(0.0) * wx));
}

ExtReal u_h_star(const GainSpec& spec) { return threshold_T(spec, 0.0); }

double h_curve(const GainSpec& spec, double u)
{
    if (!(u > 0.0)) throw NumericError("h_curve: u must be positive");
    auto g = [&](double x) { return gain(spec, u, x); };
    if (g(0.0) >= 0.0) return 0.0;
    double hi = 1.0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw NumericError("h_curve: gain never becomes positive");
    }
    return bisect_root(g, 0.0, hi, 1e-12);
}

double value_conversion(const GainSpec& spec, double v00)
{
    double v = spec.p() * v00 + spec.eg_p();
    if (v < -1e-9 * spec.eg_p()) throw NumericError("value_conversion: V(0,0) below -E(g^p)/p");
    return std::max(v, 0.0);
}

double v0_slope(const GainSpec& spec, double x)
{
    if (x > 0.0) throw NumericError("v0_slope: x must be nonpositive");
    return integrate_against_w(spec.family(), [&](double u) { return spec.eg_pm1(x - u); });
}

static double v0_increment(const GainSpec& spec, double x)
{
    if (x == 0.0) return 0.0;
    const LevyModel& m = spec.model();
    if (m.family() == Family::BrownianDrift && spec.p() == 2.0) {
        double mu = m.drift(), s2 = m.sigma() * m.sigma();
        return 1.5 * s2 / (mu * mu * mu) * x - x * x / (2.0 * mu * mu);
    }
    // V(0,x) - V(0,0) = -int_0^{-x} v0_slope(-z) dz
    auto inner = [&](double z) { return v0_slope(spec, -z); };
    return -integrate(inner, 0.0, -x, 1e-11, 1e-10).value;
}

double v0_on_negatives(const GainSpec& spec, double v00, double x)
{
    if (x > 0.0) throw NumericError("v0_on_negatives: x must be nonpositive");
    return v00 + v0_increment(spec, x);
}

double negative_landing_value(const GainSpec& spec, double v00)
{
    const LevyModel& m = spec.model();
    if (!m.has_jumps()) return 0.0;
    double rho = m.rho();
    auto f = [&](double t) { return v0_increment(spec, -t) * m.lambda() * rho * std::exp(-rho * t); };
    double tail = integrate_to_infinity(f, 0.0, 0.5 * rho, 1e-11, 1e-10).value;
    return m.lambda() * v00 + tail;
}

ExtReal u_b_residual(const GainSpec& spec, double v00, double u)
{
    const LevyModel& m = spec.model();
    if (m.infinite_variation()) return ExtReal::infinity();
    return ExtReal(gain(spec, u, 0.0) + negative_landing_value(spec, v00));
}

ExtReal solve_u_b(const GainSpec& spec, double v00)
{
    const LevyModel& m = spec.model();
    if (m.infinite_variation()) return ExtReal::infinity();
    // residual is affine in u^(p-1)
    double k = negative_landing_value(spec, v00);
    double mp = m.psi_prime(0.0);
    double up = (spec.eg_pm1(0.0) - k) / (mp * spec.family().w_at_zero());
    return ExtReal(std::pow(up, 1.0 / (spec.p() - 1.0)));
}

}  // namespace lastzero
