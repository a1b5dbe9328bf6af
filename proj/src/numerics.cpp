#include "lastzero/numerics.hpp"

#include <charconv>
#include <map>
#include <mutex>

namespace lastzero {

double ExtReal::value() const
{
    if (infinite_) throw NumericError("ExtReal::value called on infinity");
    return value_;
}

std::string ExtReal::to_string(int digits) const
{
    return infinite_ ? std::string("inf") : format_number(value_, digits);
}

std::string format_number(double v, int digits)
{
    if (std::isnan(v)) throw NumericError("refusing to serialise NaN");
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

GaussLegendre gauss_legendre(int n)
{
    static std::mutex mtx;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendre g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    cache[n] = g;
    return g;
}

double brent_root(const std::function<double(double)>& f, double a, double b, double xtol, int max_iter)
{
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw NumericError("brent_root: no sign change on bracket");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = e = b - a; }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol = 2.0 * 1e-16 * std::abs(b) + 0.5 * xtol;
        double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    throw NumericError("brent_root: iteration cap reached");
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double xtol, int max_iter)
{
    double flo = f(lo);
    for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; } else { hi = mid; }
    }
    return 0.5 * (lo + hi);
}

std::string provenance_name(Provenance p)
{
    switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::Quadrature: return "quadrature";
    case Provenance::MonteCarlo: return "mc";
    }
    return "unknown";
}

double richardson(const std::vector<double>& est, int order, int stride)
{
    std::vector<double> t = est;
    int k = order;
    for (size_t level = 1; level < est.size(); ++level, k += stride) {
        double f = std::pow(2.0, k);
        for (size_t i = 0; i + level < est.size(); ++i) t[i] = (f * t[i + 1] - t[i]) / (f - 1.0);
    }
    return t[0];
}

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x)
{
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t i = static_cast<size_t>(it - xs.begin()) - 1;
    double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

}  // namespace lastzero
