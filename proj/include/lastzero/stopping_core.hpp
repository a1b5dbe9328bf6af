// Gain function, the curve h, u_h*, u_b and V(0, x) on the negative half-line.
#pragma once

#include "lastzero/levy_model.hpp"
#include "lastzero/numerics.hpp"
#include "lastzero/scale_kit.hpp"

namespace lastzero {

class GainSpec {
public:
    // Throws ModelError when validate() rejects the pair.
    GainSpec(const LevyModel& model, const MomentOrder& p);

    const LevyModel& model() const { return fam_.model(); }
    const ScaleFamily& family() const { return fam_; }
    double p() const { return p_.p(); }
    const MomentOrder& order() const { return p_; }

    // E_x(g^(p-1)); p - 1 must be an integer in 1..4.
    double eg_pm1(double x) const;
    // E(g^p) under P_0.
    double eg_p() const { return eg_p_.value; }
    const Quantity& eg_p_quantity() const { return eg_p_; }

private:
    ScaleFamily fam_;
    MomentOrder p_;
    Quantity eg_p_;
};

// G(u, x) = u^(p-1) psi'(0+) W(x) - E_x(g^(p-1)).
double gain(const GainSpec& spec, double u, double x);

// T(x) = E_x(g^(p-1)) / (psi'(0+) W(x)); infinite at 0 under infinite variation.
ExtReal threshold_T(const GainSpec& spec, double x);

// E(g^(p-1)) / (psi'(0+) W(0)).
ExtReal u_h_star(const GainSpec& spec);

// inf{x : G(u, x) >= 0}, clipped at 0.
double h_curve(const GainSpec& spec, double u);

// V_* = p V(0,0) + E(g^p). Throws if the result is negative.
double value_conversion(const GainSpec& spec, double v00);

// V(0, x) for x <= 0.
double v0_on_negatives(const GainSpec& spec, double v00, double x);

// d/dx V(0, x) = int_[0,inf) E_{x-u}(g^(p-1)) W(du), x <= 0.
double v0_slope(const GainSpec& spec, double x);

// int_{(-inf,0)} V(0, y) Pi(dy): the value collected by a jump from level 0
// into the negative half-line. Zero without jumps.
double negative_landing_value(const GainSpec& spec, double v00);

// Residual of the u_b equation. Infinite sentinel (nothing evaluated) unless
// the model has finite variation and finite activity.
ExtReal u_b_residual(const GainSpec& spec, double v00, double u);

// Root of u_b_residual, or infinity.
ExtReal solve_u_b(const GainSpec& spec, double v00);

}  // namespace lastzero
