// Spectrally negative Levy processes with exponential jumps, drifting to +inf.
//
//   BrownianDrift   X_t = mu t + sigma B_t
//   JumpDiffusion   X_t = mu t + sigma B_t - sum_{i<=N_t} Y_i,  Y ~ Exp(rho), N ~ Poisson(lambda)
//   CramerLundberg  X_t = c t - sum_{i<=N_t} Y_i
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lastzero {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Family { BrownianDrift, JumpDiffusion, CramerLundberg };

std::string family_name(Family f);

class LevyModel {
public:
    static LevyModel brownian_drift(double mu, double sigma);
    static LevyModel jump_diffusion(double mu, double sigma, double lambda, double rho);
    static LevyModel cramer_lundberg(double c, double lambda, double rho);

    Family family() const { return family_; }
    double drift() const { return mu_; }  // mu, or c for CramerLundberg
    double sigma() const { return sigma_; }
    double lambda() const { return lambda_; }
    double rho() const { return rho_; }

    bool has_jumps() const { return lambda_ > 0.0; }
    bool infinite_variation() const { return sigma_ > 0.0; }

    // psi is analytic on (-rho, inf) for jump families and on R otherwise.
    double psi(double beta) const;
    double psi_prime(double beta) const;
    double psi_second(double beta) const;
    double domain_lower() const;  // psi is finite strictly above this

    // Right inverse of psi on [0, inf); q may be slightly negative when
    // psi has a real root structure there (used for differentiating at 0).
    double phi(double q) const;
    double phi_prime(double q) const { return 1.0 / psi_prime(phi(q)); }

    // (Phi'(0+), Phi''(0+)) from the family closed forms.
    std::pair<double, double> phi_derivatives_at_zero() const;

    // Levy density on y < 0 (zero for y >= 0).
    double levy_density(double y) const;

    std::string describe() const;

private:
    LevyModel(Family f, double mu, double sigma, double lambda, double rho)
        : family_(f), mu_(mu), sigma_(sigma), lambda_(lambda), rho_(rho) {}

    Family family_;
    double mu_, sigma_, lambda_, rho_;
};

class MomentOrder {
public:
    explicit MomentOrder(double p);
    double p() const { return p_; }
    bool is_integer() const;

private:
    double p_;
};

struct Validation {
    bool ok = true;
    std::string clause;  // "drift" or "moment" when rejected
    std::string reason;
};

Validation validate(const LevyModel& model, const MomentOrder& p);

}  // namespace lastzero
