#include "lastzero/boundary_curve.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lastzero {

BoundaryCurve::BoundaryCurve(std::vector<double> u_grid, std::vector<double> b_values,
                             std::vector<double> h_values, ExtReal u_b, double v00, double tail_exponent)
    : u_(std::move(u_grid)), b_(std::move(b_values)), h_(std::move(h_values)), u_b_(u_b), v00_(v00),
      tail_(tail_exponent)
{
    if (u_.empty() || u_.size() != b_.size()) throw std::invalid_argument("BoundaryCurve: grid/value size mismatch");
    if (h_.empty()) h_.assign(u_.size(), 0.0);
    for (size_t i = 1; i < u_.size(); ++i)
        if (!(u_[i] > u_[i - 1])) throw std::invalid_argument("BoundaryCurve: u grid must be strictly increasing");
    last_positive_ = u_.size() - 1;
    if (u_b_.is_finite()) {
        size_t i = 0;
        while (i + 1 < u_.size() && u_[i + 1] < u_b_.value()) ++i;
        last_positive_ = i;
    }
}

double BoundaryCurve::operator()(double u) const
{
    if (u_b_.is_finite() && u >= u_b_.value()) return 0.0;
    if (u <= u_.front()) return b_.front();
    size_t n = last_positive_;
    if (u >= u_[n]) {
        if (u_b_.is_finite() || n + 1 < u_.size()) return b_[n];
        return b_[n] * std::pow(u_[n] / u, tail_);
    }
    size_t lo = 0, hi = n;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (u_[mid] <= u) lo = mid; else hi = mid;
    }
    double t = std::log(u / u_[lo]) / std::log(u_[hi] / u_[lo]);
    return b_[lo] + t * (b_[hi] - b_[lo]);
}

BoundaryCurve BoundaryCurve::shifted(double delta) const
{
    std::vector<double> b = b_;
    for (double& v : b)
        if (v > 0.0) v += delta;
    return BoundaryCurve(u_, b, h_, u_b_, v00_, tail_);
}

std::string BoundaryCurve::to_csv() const
{
    std::string out = "u,b,h\n";
    for (size_t i = 0; i < u_.size(); ++i)
        out += format_number(u_[i]) + "," + format_number(b_[i]) + "," + format_number(h_[i]) + "\n";
    return out;
}

BoundaryCurve BoundaryCurve::from_csv(const std::string& text)
{
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    std::string line;
    if (!std::getline(in, line) || line.rfind("u,b,h", 0) != 0)
        throw std::invalid_argument("boundary csv: expected header u,b,h");
    std::vector<double> u, b, h;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ls.imbue(std::locale::classic());
        double x[3];
        char c1 = 0, c2 = 0;
        if (!(ls >> x[0] >> c1 >> x[1] >> c2 >> x[2]) || c1 != ',' || c2 != ',')
            throw std::invalid_argument("boundary csv: malformed row '" + line + "'");
        u.push_back(x[0]);
        b.push_back(x[1]);
        h.push_back(x[2]);
    }
    if (u.empty()) throw std::invalid_argument("boundary csv: no rows");
    // a trailing run of zeros marks a finite cutoff
    ExtReal ub = ExtReal::infinity();
    if (b.back() == 0.0) {
        size_t i = b.size() - 1;
        while (i > 0 && b[i - 1] == 0.0) --i;
        ub = ExtReal(u[i]);
    }
    return BoundaryCurve(u, b, h, ub, 0.0);
}

}  // namespace lastzero
