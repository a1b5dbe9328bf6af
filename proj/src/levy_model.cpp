#include "lastzero/levy_model.hpp"

#include "lastzero/numerics.hpp"

#include <cmath>
#include <sstream>

namespace lastzero {

std::string family_name(Family f)
{
    switch (f) {
    case Family::BrownianDrift: return "BrownianDrift";
    case Family::JumpDiffusion: return "JumpDiffusion";
    case Family::CramerLundberg: return "CramerLundberg";
    }
    return "unknown";
}

static void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw ModelError(std::string(name) + " must be a positive finite number");
}

LevyModel LevyModel::brownian_drift(double mu, double sigma)
{
    require_positive(mu, "mu");
    require_positive(sigma, "sigma");
    return LevyModel(Family::BrownianDrift, mu, sigma, 0.0, 0.0);
}

LevyModel LevyModel::jump_diffusion(double mu, double sigma, double lambda, double rho)
{
    if (!std::isfinite(mu)) throw ModelError("mu must be finite");
    require_positive(sigma, "sigma");
    require_positive(lambda, "lambda");
    require_positive(rho, "rho");
    return LevyModel(Family::JumpDiffusion, mu, sigma, lambda, rho);
}

LevyModel LevyModel::cramer_lundberg(double c, double lambda, double rho)
{
    require_positive(c, "c");
    require_positive(lambda, "lambda");
    require_positive(rho, "rho");
    return LevyModel(Family::CramerLundberg, c, 0.0, lambda, rho);
}

double LevyModel::domain_lower() const
{
    return has_jumps() ? -rho_ : -std::numeric_limits<double>::infinity();
}

double LevyModel::psi(double beta) const
{
    double v = mu_ * beta + 0.5 * sigma_ * sigma_ * beta * beta;
    if (has_jumps()) v -= lambda_ * beta / (rho_ + beta);
    return v;
}

double LevyModel::psi_prime(double beta) const
{
    double v = mu_ + sigma_ * sigma_ * beta;
    if (has_jumps()) v -= lambda_ * rho_ / ((rho_ + beta) * (rho_ + beta));
    return v;
}

double LevyModel::psi_second(double beta) const
{
    double v = sigma_ * sigma_;
    if (has_jumps()) v += 2.0 * lambda_ * rho_ / std::pow(rho_ + beta, 3);
    return v;
}

double LevyModel::phi(double q) const
{
    if (q == 0.0 && psi_prime(0.0) > 0.0) return 0.0;
    // psi is increasing to the right of its minimiser; for q >= 0 that is [0, inf)
    double lo = 0.0;
    if (q < 0.0) {
        // minimiser of psi, located by bisection on psi'
        double a = has_jumps() ? -rho_ * (1.0 - 1e-12) : -1.0;
        if (!has_jumps()) while (psi_prime(a) > 0.0) a *= 2.0;
        double m = bisect_root([this](double b) { return psi_prime(b); }, a, 0.0, 1e-15);
        if (psi(m) > q) throw NumericError("phi: q below the minimum of psi");
        lo = m;
    }
    double hi = 1.0;
    while (psi(hi) < q) hi *= 2.0;
    double x = q < 0.0 ? 0.5 * (lo + 0.0) : 0.5 * (lo + hi);
    if (q < 0.0) hi = 0.0;
    for (int it = 0; it < 200; ++it) {
        double f = psi(x) - q;
        if (f > 0) hi = x; else lo = x;
        double d = psi_prime(x);
        double nx = x - f / d;
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) <= 1e-15 * std::max(1.0, std::abs(x))) return nx;
        x = nx;
    }
    throw NumericError("phi: Newton iteration did not converge");
}

std::pair<double, double> LevyModel::phi_derivatives_at_zero() const
{
    switch (family_) {
    case Family::BrownianDrift:
        return {1.0 / mu_, -sigma_ * sigma_ / std::pow(mu_, 3)};
    case Family::JumpDiffusion: {
        double d = mu_ * rho_ - lambda_;
        return {rho_ / d, -(sigma_ * sigma_ * std::pow(rho_, 3) + 2.0 * lambda_ * rho_) / std::pow(d, 3)};
    }
    case Family::CramerLundberg: {
        double d = mu_ * rho_ - lambda_;
        return {rho_ / d, -2.0 * lambda_ * rho_ / std::pow(d, 3)};
    }
    }
    return {0.0, 0.0};
}

double LevyModel::levy_density(double y) const
{
    if (!has_jumps() || y >= 0.0) return 0.0;
    return lambda_ * rho_ * std::exp(rho_ * y);
}

std::string LevyModel::describe() const
{
    std::ostringstream os;
    os << family_name(family_) << "(";
    switch (family_) {
    case Family::BrownianDrift: os << "mu=" << format_number(mu_) << ", sigma=" << format_number(sigma_); break;
    case Family::JumpDiffusion:
        os << "mu=" << format_number(mu_) << ", sigma=" << format_number(sigma_) << ", lambda="
           << format_number(lambda_) << ", rho=" << format_number(rho_);
        break;
    case Family::CramerLundberg:
        os << "c=" << format_number(mu_) << ", lambda=" << format_number(lambda_) << ", rho=" << format_number(rho_);
        break;
    }
    os << ")";
    return os.str();
}

MomentOrder::MomentOrder(double p) : p_(p)
{
    if (!(p > 1.0) || !std::isfinite(p)) throw ModelError("moment order p must satisfy p > 1");
}

bool MomentOrder::is_integer() const { return std::floor(p_) == p_; }

Validation validate(const LevyModel& model, const MomentOrder& p)
{
    Validation v;
    double m = model.psi_prime(0.0);
    if (!(m > 0.0)) {
        v.ok = false;
        v.clause = "drift";
        std::ostringstream os;
        os << "psi'(0+) = " << format_number(m) << " <= 0: process does not drift to +infinity";
        v.reason = os.str();
        return v;
    }
    // Exponential jump tails integrate |x|^(p+1) for every p.
    (void)p;
    return v;
}

}  // namespace lastzero
