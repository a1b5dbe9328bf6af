// Numerical building blocks: Gaussian helpers, quadrature, root finding,
// an extended-real type for legitimately infinite quantities.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace lastzero {

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Real number or +infinity, without relying on IEEE overflow.
class ExtReal {
public:
    ExtReal() = default;
    explicit ExtReal(double v) : value_(v) {}
    static ExtReal infinity() { ExtReal r; r.infinite_ = true; return r; }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }
    double value() const;               // throws on infinity
    double value_or(double fallback) const { return infinite_ ? fallback : value_; }
    std::string to_string(int digits = 12) const;

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

// Locale-independent decimal, `digits` significant figures. NaN is an error.
std::string format_number(double v, int digits = 12);

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }
inline double normal_pdf(double z) { return 0.3989422804014327 * std::exp(-0.5 * z * z); }

// Nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> x, w;
};
GaussLegendre gauss_legendre(int n);

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {
// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
QuadResult gk15(F& f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double rk = fc * kWgk[7], rg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * kXgk[j];
        double f1 = f(c - dx), f2 = f(c + dx);
        rk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
    }
    QuadResult r;
    r.value = rk * h;
    r.abs_error = std::abs((rk - rg) * h);
    r.intervals = 1;
    return r;
}
}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) on [a, b].
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol = 1e-10, double rel_tol = 1e-8,
                     int max_intervals = 2000)
{
    QuadResult out;
    if (a == b) { out.converged = true; return out; }
    double sign = 1.0;
    if (b < a) { std::swap(a, b); sign = -1.0; }

    struct Piece { double a, b, v, e; bool operator<(const Piece& o) const { return e < o.e; } };
    std::priority_queue<Piece> heap;
    auto first = detail::gk15(f, a, b);
    heap.push({a, b, first.value, first.abs_error});
    double total = first.value, err = first.abs_error;
    int n = 1;
    while (err > std::max(abs_tol, rel_tol * std::abs(total)) && n < max_intervals) {
        Piece p = heap.top();
        heap.pop();
        double m = 0.5 * (p.a + p.b);
        if (m <= p.a || m >= p.b) { heap.push(p); break; }
        auto l = detail::gk15(f, p.a, m);
        auto r = detail::gk15(f, m, p.b);
        total += l.value + r.value - p.v;
        err += l.abs_error + r.abs_error - p.e;
        heap.push({p.a, m, l.value, l.abs_error});
        heap.push({m, p.b, r.value, r.abs_error});
        ++n;
    }
    // re-sum to shed accumulated cancellation
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) { total += heap.top().v; err += heap.top().e; heap.pop(); }
    out.value = sign * total;
    out.abs_error = err;
    out.intervals = n;
    out.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

// Integral over [a, inf) for an integrand bounded by C*exp(-rate*(x-a)).
// The range is cut where the envelope falls below 1e-14.
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, double rate, double abs_tol = 1e-10,
                                 double rel_tol = 1e-8)
{
    if (!(rate > 0.0)) throw NumericError("integrate_to_infinity: decay rate must be positive");
    double upper = a + std::log(1e14) / rate;
    // split so early mass is resolved before the tail
    double mid = a + 2.0 / rate;
    auto r1 = integrate(f, a, mid, abs_tol, rel_tol);
    auto r2 = integrate(f, mid, upper, abs_tol, rel_tol);
    QuadResult r;
    r.value = r1.value + r2.value;
    r.abs_error = r1.abs_error + r2.abs_error;
    r.intervals = r1.intervals + r2.intervals;
    r.converged = r1.converged && r2.converged;
    return r;
}

// Brent's method; requires a sign change on [lo, hi].
double brent_root(const std::function<double(double)>& f, double lo, double hi, double xtol = 1e-12,
                  int max_iter = 200);

// Plain bisection; returns midpoint of the final bracket.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double xtol,
                   int max_iter = 200);

// Richardson extrapolation of estimates at steps h, h/2, h/4, ... with error
// expansion c1 h^order + c2 h^(order+stride) + ...
double richardson(const std::vector<double>& estimates, int order = 1, int stride = 1);

// A number together with how it was obtained.
enum class Provenance { ClosedForm, Quadrature, MonteCarlo };
std::string provenance_name(Provenance p);

struct Quantity {
    double value = 0.0;
    double se = 0.0;  // standard error; zero unless Monte Carlo
    Provenance provenance = Provenance::ClosedForm;
};

// Linear interpolation on a sorted grid, clamped at both ends.
double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x);

}  // namespace lastzero
