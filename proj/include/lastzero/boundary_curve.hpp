// Discretised stopping boundary u -> b(u).
#pragma once

#include "lastzero/numerics.hpp"

#include <string>
#include <vector>

namespace lastzero {

class BoundaryCurve {
public:
    BoundaryCurve() = default;
    // Linear in log u between nodes; b beyond u_max decays like (u_max/u)^tail_exponent;
    // below u_min it is held constant.
    BoundaryCurve(std::vector<double> u_grid, std::vector<double> b_values, std::vector<double> h_values,
                  ExtReal u_b, double v00, double tail_exponent = 1.0 / 3.0);

    double operator()(double u) const;

    const std::vector<double>& u_grid() const { return u_; }
    const std::vector<double>& b_values() const { return b_; }
    const std::vector<double>& h_values() const { return h_; }
    ExtReal u_b() const { return u_b_; }
    double v00() const { return v00_; }
    double tail_exponent() const { return tail_; }
    double u_min() const { return u_.front(); }
    double u_max() const { return u_.back(); }
    bool empty() const { return u_.empty(); }

    // Copy with b shifted by delta wherever b > 0.
    BoundaryCurve shifted(double delta) const;

    // boundary.csv: header "u,b,h".
    std::string to_csv() const;
    static BoundaryCurve from_csv(const std::string& text);

private:
    std::vector<double> u_, b_, h_;
    ExtReal u_b_ = ExtReal::infinity();
    double v00_ = 0.0;
    double tail_ = 1.0 / 3.0;
    size_t last_positive_ = 0;  // index of the last node with u < u_b
};

}  // namespace lastzero
