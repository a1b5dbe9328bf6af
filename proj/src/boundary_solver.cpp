#include "lastzero/boundary_solver.hpp"

#include "lastzero/path_sim.hpp"
#include "lastzero/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lastzero {

namespace {

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<size_t>(i)] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    return g;
}

// Piecewise-uniform time grid: (step, end) pairs.
std::vector<double> piecewise_grid(const std::vector<std::pair<double, double>>& pieces, double s_max)
{
    std::vector<double> s{0.0};
    for (auto [step, end] : pieces) {
        end = std::min(end, s_max);
        while (s.back() + 0.5 * step < end) s.push_back(std::min(s.back() + step, end));
        if (end >= s_max) break;
    }
    while (s.back() < s_max - 1e-12) s.push_back(std::min(s.back() + pieces.back().first, s_max));
    return s;
}

std::vector<double> trapezoid_weights(const std::vector<double>& s)
{
    std::vector<double> w(s.size(), 0.0);
    for (size_t k = 1; k < s.size(); ++k) {
        double d = s[k] - s[k - 1];
        w[k - 1] += 0.5 * d;
        w[k] += 0.5 * d;
    }
    return w;
}

// Probability of creeping to 0 from x > 0: (sigma^2/2) W'(x).
double creep_probability(const ScaleFamily& fam, double x)
{
    double s = fam.model().sigma();
    if (s == 0.0) return 0.0;
    if (x <= 0.0) return 1.0;
    return 0.5 * s * s * fam.w_prime(x);
}

void require_p2(const GainSpec& spec, const char* what)
{
    if (spec.p() != 2.0) throw std::invalid_argument(std::string(what) + ": implemented for p = 2 only");
}

}  // namespace

SolverConfig SolverConfig::defaults_for(const LevyModel& model)
{
    SolverConfig c;
    if (model.family() != Family::BrownianDrift) c.mc_kernel_paths = 100000;
    if (model.family() == Family::CramerLundberg) {
        c.u_min = 0.1;
        c.u_max = 1000.0;
        c.n_u = 70;
        c.table_dx = 0.25;
        c.s_max = 200.0;
    } else if (model.family() == Family::BrownianDrift) {
        c.n_u = 120;
    } else if (model.family() == Family::JumpDiffusion) {
        c.table_dx = 0.1;
        c.s_max = 12.0;
    }
    return c;
}

void SolverConfig::check() const
{
    if (!(u_min > 0.0 && u_max > u_min && n_u >= 3)) throw std::invalid_argument("solver: bad u grid");
    if (r_nodes < 2 || !(r_max > 0.0)) throw std::invalid_argument("solver: bad r quadrature");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("solver: damping must be in (0, 1]");
    if (!(tol_fixed_point > 0.0 && tol_smooth_fit > 0.0 && fd_step > 0.0 && v00_tol > 0.0))
        throw std::invalid_argument("solver: tolerances must be positive");
    if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("solver: iteration caps must be positive");
    if (mc_kernel_paths < 100) throw std::invalid_argument("solver: mc_kernel_paths too small");
    if (x_max < 0.0 || table_dx < 0.0 || s_max < 0.0) throw std::invalid_argument("solver: negative table extent");
}

// ---------------------------------------------------------------- Brownian drift

double kernel_H(const GainSpec& spec, double r, double t, double x, double b)
{
    if (spec.model().family() != Family::BrownianDrift) throw std::invalid_argument("kernel_H: BrownianDrift only");
    require_p2(spec, "kernel_H");
    if (!(r > 0.0)) throw std::invalid_argument("kernel_H: r must be positive");
    if (b <= 0.0) return 0.0;
    const double mu = spec.model().drift(), sig = spec.model().sigma();
    const double kappa = 2.0 * mu / (sig * sig);
    const double s = sig * std::sqrt(r);
    const double e = std::exp(-kappa * x);
    double t1 = (r + t) * (normal_cdf((b - x - mu * r) / s) - normal_cdf((-x - mu * r) / s));
    double t2 = -(x / mu + t + sig * sig / (mu * mu)) * e *
                (normal_cdf((b - x + mu * r) / s) - normal_cdf((-x + mu * r) / s));
    double t3 = s / mu * e * (normal_pdf((b - x + mu * r) / s) - normal_pdf((-x + mu * r) / s));
    return t1 + t2 + t3;
}

namespace {

struct RPanels {
    std::vector<double> r, w;
};

// Panels in r with breakpoints at the curve nodes (b is only piecewise smooth),
// r = t^2 on the first panel, geometric panels up to r_max.
RPanels make_panels(const std::vector<double>& u_grid, double u, const SolverConfig& cfg)
{
    std::vector<double> br{0.0};
    for (double uj : u_grid)
        if (uj > u + 1e-14) br.push_back(uj - u);
    double R = std::max(br.back(), 1.0);
    while (R < cfg.r_max) {
        R = std::min(R * 1.5, cfg.r_max);
        br.push_back(R);
    }
    const GaussLegendre& gl = gauss_legendre(cfg.r_nodes);
    RPanels p;
    for (size_t i = 1; i < br.size(); ++i) {
        double a = br[i - 1], b = br[i];
        if (a == 0.0) {
            double T = std::sqrt(b);
            for (size_t q = 0; q < gl.x.size(); ++q) {
                double t = 0.5 * T * (gl.x[q] + 1.0);
                p.r.push_back(t * t);
                p.w.push_back(0.5 * T * gl.w[q] * 2.0 * t);
            }
        } else {
            for (size_t q = 0; q < gl.x.size(); ++q) {
                p.r.push_back(a + 0.5 * (b - a) * (gl.x[q] + 1.0));
                p.w.push_back(0.5 * (b - a) * gl.w[q]);
            }
        }
    }
    return p;
}

struct BmParts {
    double value = 0.0;
    double reflected = 0.0;
    double tail = 0.0;
};

// Representation of V(u,x), x > 0, without clamping at the boundary.
template <class Curve>
BmParts bm_formula(const GainSpec& spec, const Curve& b, const RPanels& pan, double v00, double u, double x)
{
    const double mu = spec.model().drift(), sig = spec.model().sigma();
    const double e = std::exp(-2.0 * mu / (sig * sig) * x);
    BmParts out;
    double direct = 0.0, refl = 0.0;
    for (size_t q = 0; q < pan.r.size(); ++q) {
        double bb = b(u + pan.r[q]);
        direct += pan.w[q] * kernel_H(spec, pan.r[q], u, x, bb);
        refl += pan.w[q] * kernel_H(spec, pan.r[q], u, -x, bb);
    }
    out.value = v00 * e + direct - e * refl;
    out.reflected = e * refl;
    double rl = pan.r.back();
    out.tail = std::abs(kernel_H(spec, rl, u, x, b(u + rl)) - e * kernel_H(spec, rl, u, -x, b(u + rl))) * rl;
    return out;
}

class BmSurface : public ValueSurface {
public:
    BmSurface(GainSpec spec, BoundaryCurve curve, SolverConfig cfg)
        : ValueSurface(std::move(spec), std::move(curve), cfg.fd_step), cfg_(std::move(cfg)) {}

    double operator()(double u, double x) const override { return value_bm(spec_, curve_, u, x, cfg_); }
    double script_v(double, double) const override { return 0.0; }

private:
    SolverConfig cfg_;
};

}  // namespace

double value_bm(const GainSpec& spec, const BoundaryCurve& curve, double u, double x, const SolverConfig& cfg)
{
    if (spec.model().family() != Family::BrownianDrift) throw std::invalid_argument("value_bm: BrownianDrift only");
    require_p2(spec, "value_bm");
    if (x <= 0.0) return v0_on_negatives(spec, curve.v00(), x);
    if (u < 0.0) throw std::invalid_argument("value_bm: u must be nonnegative");
    if (x >= curve(u)) return 0.0;
    RPanels pan = make_panels(curve.u_grid(), u, cfg);
    BmParts p = bm_formula(spec, curve, pan, curve.v00(), u, x);
    if (p.tail > cfg.tol_fixed_point / 10.0) throw NumericError("value_bm: r-integral truncation tail too large");
    return p.value;
}

std::shared_ptr<ValueSurface> make_bm_surface(const GainSpec& spec, const BoundaryCurve& curve,
                                              const SolverConfig& cfg)
{
    return std::make_shared<BmSurface>(spec, curve, cfg);
}

namespace {

// Piecewise linear in log u over the grid, with the u^(-1/3) tail.
struct GridCurve {
    const std::vector<double>* u;
    std::vector<double> b;
    double tail = 1.0 / 3.0;
    ExtReal u_b = ExtReal::infinity();

    double operator()(double v) const
    {
        const auto& g = *u;
        if (u_b.is_finite() && v >= u_b.value()) return 0.0;
        if (v <= g.front()) return b.front();
        if (v >= g.back()) return u_b.is_finite() ? b.back() : b.back() * std::pow(g.back() / v, tail);
        size_t hi = static_cast<size_t>(std::upper_bound(g.begin(), g.end(), v) - g.begin());
        size_t lo = hi - 1;
        double t = std::log(v / g[lo]) / std::log(g[hi] / g[lo]);
        return b[lo] + t * (b[hi] - b[lo]);
    }
};

// Root of f on [lo, ...): lo itself when f(lo) >= 0, else the first sign
// change found by stepping up, refined by Brent.
double boundary_root(const std::function<double(double)>& f, double lo, double step, double cap, int& floors)
{
    double flo = f(lo);
    if (flo >= 0.0) {
        ++floors;
        return lo;
    }
    double a = lo, hi = lo + step;
    while (f(hi) < 0.0) {
        a = hi;
        hi += step;
        if (hi > cap) throw SolverError("boundary root not bracketed below " + format_number(cap));
    }
    return brent_root(f, a, hi, 1e-10);
}

struct BmSweep {
    std::vector<double> b;
    int floors = 0;
    double max_reflected = 0.0;
};

BmSweep bm_sweep(const GainSpec& spec, const std::vector<double>& ug, const std::vector<double>& hg,
                 const std::vector<RPanels>& pans, double v00)
{
    const size_t n = ug.size();
    GridCurve c{&ug, hg};
    BmSweep out;
    for (size_t i = n; i-- > 0;) {
        auto f = [&](double x) {
            c.b[i] = x;
            return bm_formula(spec, c, pans[i], v00, ug[i], x).value;
        };
        double bi = boundary_root(f, hg[i], 0.5, 200.0, out.floors);
        c.b[i] = bi;
        out.max_reflected = std::max(out.max_reflected, bm_formula(spec, c, pans[i], v00, ug[i], bi).reflected);
    }
    out.b = c.b;
    return out;
}

// Right derivative of V(0, .) at 0 from [V(d, d) - V(0,0)] / d, Richardson over d, d/2.
template <class Curve>
double bm_right_slope(const GainSpec& spec, const Curve& c, const std::vector<double>& ug, double v00,
                      const SolverConfig& cfg)
{
    std::vector<double> est;
    for (double d : {cfg.fd_step, 0.5 * cfg.fd_step}) {
        RPanels p = make_panels(ug, d, cfg);
        est.push_back((bm_formula(spec, c, p, v00, d, d).value - v00) / d);
    }
    return richardson(est, 1, 1);
}

Solution solve_bm(const GainSpec& spec, const SolverConfig& cfg)
{
    require_p2(spec, "solve");
    std::vector<double> ug = log_grid(cfg.u_min, cfg.u_max, cfg.n_u);
    std::vector<double> hg(ug.size());
    for (size_t i = 0; i < ug.size(); ++i) hg[i] = h_curve(spec, ug[i]);
    std::vector<RPanels> pans;
    for (double u : ug) pans.push_back(make_panels(ug, u, cfg));

    const auto [phi1, phi2] = spec.model().phi_derivatives_at_zero();
    (void)phi1;
    const double target = -1.5 * phi2;  // 3 sigma^2 / (2 mu^3)
    SolverDiagnostics d;
    d.derivative_target = target;
    d.closure = "derivative matching at (0,0)";

    auto residual = [&](double v00, BmSweep& sw) {
        sw = bm_sweep(spec, ug, hg, pans, v00);
        GridCurve c{&ug, sw.b};
        double r = bm_right_slope(spec, c, ug, v00, cfg) - target;
        d.v00_history.push_back(v00);
        d.outer_residuals.push_back(r);
        ++d.outer_iterations;
        d.inner_iterations += static_cast<int>(ug.size());
        return r;
    };

    // bisection on the admissible interval
    double lo = -spec.eg_p() / spec.p(), hi = -1e-9 * spec.eg_p();
    BmSweep sw;
    double r_lo = residual(lo, sw), r_hi = residual(hi, sw);
    if (r_lo * r_hi > 0.0)
        throw SolverError("V(0,0) bracket failure: residuals " + format_number(r_lo) + ", " + format_number(r_hi));
    double v00 = 0.5 * (lo + hi);
    while (hi - lo > cfg.v00_tol) {
        if (d.outer_iterations >= cfg.max_outer) throw SolverError("V(0,0) bisection did not converge");
        v00 = 0.5 * (lo + hi);
        double r = residual(v00, sw);
        if ((r < 0.0) == (r_lo < 0.0)) lo = v00; else hi = v00;
    }
    v00 = 0.5 * (lo + hi);
    double r = residual(v00, sw);
    d.derivative_estimate = r + target;
    d.h_floor_nodes = sw.floors;
    d.max_reflected_term = sw.max_reflected;

    for (size_t i = 1; i < sw.b.size(); ++i)
        d.max_monotonicity_violation = std::max(d.max_monotonicity_violation, sw.b[i] - sw.b[i - 1]);

    Solution s;
    s.curve = BoundaryCurve(ug, sw.b, hg, ExtReal::infinity(), v00);
    s.surface = make_bm_surface(spec, s.curve, cfg);
    for (double u : ug) {
        double res = smooth_fit_residual(*s.surface, u);
        d.smooth_fit.push_back(res);
        d.max_smooth_fit = std::max(d.max_smooth_fit, std::abs(res));
    }
    s.diagnostics = d;
    return s;
}

}  // namespace

// ---------------------------------------------------------------- jump families

KernelTables::KernelTables(const GainSpec& spec, const std::vector<double>& s_grid, double dx, int n_x,
                           std::int64_t n_paths, std::uint64_t seed, int threads)
    : s_(s_grid), w_(trapezoid_weights(s_grid)), dx_(dx), n_x_(n_x), n_paths_(n_paths)
{
    if (s_.size() < 2 || s_.front() != 0.0) throw std::invalid_argument("KernelTables: s grid must start at 0");
    if (!(dx > 0.0) || n_x < 2 || n_paths < 1) throw std::invalid_argument("KernelTables: bad extent");
    const LevyModel& model = spec.model();
    const ScaleFamily& fam = spec.family();
    const size_t K = s_.size(), J = static_cast<size_t>(n_x);
    const double x_max = dx * n_x;
    const double rho = model.rho();

    // skeleton values and running minima at the grid times
    std::vector<float> X(static_cast<size_t>(n_paths) * K), M(static_cast<size_t>(n_paths) * K);
    parallel_for(n_paths, threads, [&](std::int64_t p) {
        PathWalker w(model, 0.0, s_, seed, static_cast<std::uint64_t>(p));
        w.set_min_level(std::numeric_limits<double>::infinity());
        size_t base = static_cast<size_t>(p) * K;
        double m = 0.0;
        X[base] = 0.0f;
        M[base] = 0.0f;
        Segment seg;
        while (w.next(seg)) {
            m = std::min({m, seg.min, seg.x1_after});
            if (w.at_grid_epoch()) {
                auto k = static_cast<size_t>(w.grid_index());
                X[base + k] = static_cast<float>(w.value());
                M[base + k] = static_cast<float>(m);
            }
        }
    });

    // gain ingredients on a fine z grid
    const int fine = 64;
    const size_t nf = J * fine + 2;
    const double hz = dx / fine;
    std::vector<double> fw(nf), fg(nf);
    const double pw = model.psi_prime(0.0);
    for (size_t i = 0; i < nf; ++i) {
        double z = hz * static_cast<double>(i);
        fw[i] = pw * fam.w(z);
        fg[i] = spec.eg_pm1(z);
    }

    const size_t stride = J + 1;
    cw_.assign(K * J * stride, 0.0f);
    cg_.assign(K * J * stride, 0.0f);
    ce_.assign(K * J * stride, 0.0f);
    etot_.assign(K * J, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n_paths);

    parallel_for(static_cast<std::int64_t>(K), threads, [&](std::int64_t kk) {
        auto k = static_cast<size_t>(kk);
        std::vector<double> hw(J * stride, 0.0), hg(J * stride, 0.0), he(J * stride, 0.0), et(J, 0.0);
        for (std::int64_t p = 0; p < n_paths; ++p) {
            size_t idx = static_cast<size_t>(p) * K + k;
            double xs = X[idx], ms = M[idx];
            // alive for x_j >= -M
            double jmin_d = std::ceil(-ms / dx - 1e-9);
            size_t j0 = jmin_d <= 0.0 ? 0 : static_cast<size_t>(jmin_d);
            if (k == 0) j0 = 0;
            for (size_t j = j0; j < J; ++j) {
                double z = dx * static_cast<double>(j) + xs;
                if (z < 0.0) z = 0.0;
                double ez = std::exp(-rho * z);
                et[j] += ez;
                if (z >= x_max) continue;
                double fz = z / hz;
                auto i0 = static_cast<size_t>(fz);
                double t = fz - static_cast<double>(i0);
                auto m = static_cast<size_t>(z / dx);
                if (m >= J) continue;
                size_t c = j * stride + m;
                hw[c] += fw[i0] + t * (fw[i0 + 1] - fw[i0]);
                hg[c] += fg[i0] + t * (fg[i0 + 1] - fg[i0]);
                he[c] += ez;
            }
        }
        for (size_t j = 0; j < J; ++j) {
            double aw = 0.0, ag = 0.0, ae = 0.0;
            size_t c0 = (k * J + j) * stride;
            for (size_t m = 0; m < J; ++m) {
                cw_[c0 + m] = static_cast<float>(aw * inv_n);
                cg_[c0 + m] = static_cast<float>(ag * inv_n);
                ce_[c0 + m] = static_cast<float>(ae * inv_n);
                aw += hw[j * stride + m];
                ag += hg[j * stride + m];
                ae += he[j * stride + m];
            }
            cw_[c0 + J] = static_cast<float>(aw * inv_n);
            cg_[c0 + J] = static_cast<float>(ag * inv_n);
            ce_[c0 + J] = static_cast<float>(ae * inv_n);
            etot_[k * J + j] = et[j] * inv_n;
        }
    });
}

KernelTables::Terms KernelTables::at(size_t k, size_t j, double b) const
{
    Terms t;
    t.e_total = etot_[k * static_cast<size_t>(n_x_) + j];
    if (b <= 0.0) return t;
    double fm = b / dx_;
    size_t c0 = cell(k, j);
    if (fm >= n_x_) {
        t.aw = cw_[c0 + static_cast<size_t>(n_x_)];
        t.ag = cg_[c0 + static_cast<size_t>(n_x_)];
        t.ae = ce_[c0 + static_cast<size_t>(n_x_)];
        return t;
    }
    auto m = static_cast<size_t>(fm);
    double f = fm - static_cast<double>(m);
    auto lerp = [&](const std::vector<float>& v) {
        return static_cast<double>(v[c0 + m]) + f * (static_cast<double>(v[c0 + m + 1]) - v[c0 + m]);
    };
    t.aw = lerp(cw_);
    t.ag = lerp(cg_);
    t.ae = lerp(ce_);
    return t;
}

KernelEstimate kernel_F1_F2(const GainSpec& spec, double b, double s, double u, double x, double v00,
                            std::int64_t n_paths, std::uint64_t seed)
{
    const LevyModel& m = spec.model();
    if (!m.has_jumps()) throw std::invalid_argument("kernel_F1_F2: jump families only");
    require_p2(spec, "kernel_F1_F2");
    if (!(s > 0.0) || n_paths < 2) throw std::invalid_argument("kernel_F1_F2: s > 0 and n_paths >= 2 required");
    KernelEstimate e;
    if (x < 0.0) return e;
    const double K = negative_landing_value(spec, v00);
    const double pw = m.psi_prime(0.0), rho = m.rho();
    std::vector<double> grid;
    for (double t = 0.0; t < s - 1e-12; t += 0.01) grid.push_back(t);
    grid.push_back(s);
    double s1 = 0.0, s1q = 0.0, s2 = 0.0, s2q = 0.0;
    for (std::int64_t p = 0; p < n_paths; ++p) {
        PathWalker w(m, x, grid, seed, static_cast<std::uint64_t>(p));
        w.set_min_level(0.0);
        Segment seg;
        bool alive = true;
        while (w.next(seg))
            if (seg.min < 0.0 || seg.x1_after < 0.0) { alive = false; break; }
        double f1 = 0.0, f2 = 0.0;
        if (alive) {
            double z = w.value();
            if (z < b) f1 = (u + s) * pw * spec.family().w(z) - spec.eg_pm1(z) + K * std::exp(-rho * z);
            else f2 = std::exp(-rho * z);
        }
        s1 += f1;
        s1q += f1 * f1;
        s2 += f2;
        s2q += f2 * f2;
    }
    const double n = static_cast<double>(n_paths);
    e.f1 = s1 / n;
    e.f2 = s2 / n;
    e.f1_se = std::sqrt(std::max(0.0, (s1q / n - e.f1 * e.f1) / (n - 1)));
    e.f2_se = std::sqrt(std::max(0.0, (s2q / n - e.f2 * e.f2) / (n - 1)));
    return e;
}

namespace {

// Value rows of a jump-family solution: V(u_i, x_j) and the running
// integrals int_0^{x_j} V(u_i, y) lambda rho e^{rho y} dy.
struct JumpRows {
    std::vector<double> u;
    std::vector<std::vector<double>> v, cum;
    std::vector<double> total;  // script V(u_i, b(u_i))
};

class JumpModel {
public:
    JumpModel(const GainSpec& spec, std::shared_ptr<const KernelTables> tab, double v00)
        : spec_(spec), tab_(std::move(tab)), v00_(v00), K_(negative_landing_value(spec, v00))
    {
        const auto& fam = spec.family();
        creep_.resize(static_cast<size_t>(tab_->n_x()));
        for (size_t j = 0; j < creep_.size(); ++j) creep_[j] = creep_probability(fam, tab_->x(j));
    }

    double v00() const { return v00_; }
    double K() const { return K_; }
    const KernelTables& tables() const { return *tab_; }
    std::shared_ptr<const KernelTables> tables_ptr() const { return tab_; }

    // Representation at grid level j (unclamped).
    template <class Curve, class SV>
    double formula(double u, size_t j, const Curve& b, const SV& sv) const
    {
        const auto& s = tab_->s_grid();
        const auto& w = tab_->s_weights();
        double acc = v00_ * creep_[j];
        for (size_t k = 0; k < s.size(); ++k) {
            double v = u + s[k];
            auto t = tab_->at(k, j, b(v));
            double f2 = t.f2();
            double term = v * t.aw - t.ag + K_ * t.ae;
            if (f2 > 0.0) term -= sv(v) * f2;
            acc += w[k] * term;
        }
        return acc;
    }

    // Representation at any x >= 0 by interpolation between grid levels.
    template <class Curve, class SV>
    double formula_x(double u, double x, const Curve& b, const SV& sv) const
    {
        double fj = x / tab_->dx();
        auto j = static_cast<size_t>(fj);
        if (j + 1 >= static_cast<size_t>(tab_->n_x())) throw SolverError("evaluation beyond the kernel table extent");
        double t = fj - static_cast<double>(j);
        double a = formula(u, j, b, sv);
        if (t == 0.0) return a;
        return a + t * (formula(u, j + 1, b, sv) - a);
    }

private:
    const GainSpec& spec_;
    std::shared_ptr<const KernelTables> tab_;
    double v00_, K_;
    std::vector<double> creep_;
};

// script V(v, b(v)) from stored rows, linear in u; row 0 below the grid and
// the last row (cut at b(v)) beyond it.
struct RowLookup {
    const JumpRows* rows;
    const KernelTables* tab;
    const std::function<double(double)>* b;
    size_t lag_from = 0;  // rows below this index are not yet available

    double cum_at(size_t i, double y) const
    {
        const auto& c = rows->cum[i];
        double fj = y / tab->dx();
        if (fj <= 0.0) return 0.0;
        auto j = static_cast<size_t>(fj);
        if (j + 1 >= c.size()) return c.back();
        return c[j] + (fj - static_cast<double>(j)) * (c[j + 1] - c[j]);
    }

    double operator()(double v) const
    {
        const auto& u = rows->u;
        size_t n = u.size();
        if (v >= u.back()) return cum_at(n - 1, (*b)(v));
        size_t first = lag_from;
        if (v <= u[first]) return rows->total[first];
        size_t hi = static_cast<size_t>(std::upper_bound(u.begin(), u.end(), v) - u.begin());
        size_t lo = hi - 1;
        double t = (v - u[lo]) / (u[hi] - u[lo]);
        return rows->total[lo] + t * (rows->total[hi] - rows->total[lo]);
    }
};

void fill_row(const JumpModel& jm, const LevyModel& model, double u, double bi,
              const std::function<double(double)>& bfun, const RowLookup& sv, std::vector<double>& v,
              std::vector<double>& cum, double& total)
{
    const KernelTables& tab = jm.tables();
    const size_t J = static_cast<size_t>(tab.n_x());
    const double lr = model.lambda() * model.rho(), rho = model.rho(), dx = tab.dx();
    v.assign(J, 0.0);
    cum.assign(J, 0.0);
    for (size_t j = 0; j < J && tab.x(j) < bi; ++j) v[j] = std::min(0.0, jm.formula(u, j, bfun, sv));
    // trapezoid of V e^{rho y} with V(b) = 0 closing the last cell
    for (size_t j = 1; j < J; ++j) {
        double y0 = tab.x(j - 1), y1 = tab.x(j);
        double f0 = v[j - 1] * std::exp(rho * y0), f1 = v[j] * std::exp(rho * y1);
        double add;
        if (y1 <= bi) add = 0.5 * dx * (f0 + f1);
        else if (y0 < bi) add = 0.5 * (bi - y0) * f0;
        else add = 0.0;
        cum[j] = cum[j - 1] + lr * add;
    }
    total = cum.back();
}

class JumpSurface : public ValueSurface {
public:
    JumpSurface(GainSpec spec, BoundaryCurve curve, std::shared_ptr<const KernelTables> tab, JumpRows rows,
                double fd_step)
        : ValueSurface(std::move(spec), std::move(curve), fd_step), jm_(spec_, std::move(tab), curve_.v00()),
          rows_(std::move(rows))
    {
        bfun_ = [this](double v) { return curve_(v); };
    }

    double operator()(double u, double x) const override
    {
        if (x < 0.0) return v0_on_negatives(spec_, curve_.v00(), x);
        if (x == 0.0 && (spec_.model().infinite_variation() || u == 0.0)) return curve_.v00();
        if (x >= curve_(u)) return 0.0;
        RowLookup sv{&rows_, &jm_.tables(), &bfun_, 0};
        double b = curve_(u);
        // interpolate towards V(u, b) = 0 in the last cell
        const double dx = jm_.tables().dx();
        double xl = std::floor(x / dx) * dx;
        double vl = std::min(0.0, jm_.formula_x(u, xl, bfun_, sv));
        if (xl + dx <= b) {
            double vr = std::min(0.0, jm_.formula_x(u, xl + dx, bfun_, sv));
            return std::min(0.0, vl + (x - xl) / dx * (vr - vl));
        }
        return std::min(0.0, vl * (b - x) / (b - xl));
    }

    double script_v(double u, double b) const override
    {
        const LevyModel& m = spec_.model();
        b = std::min(b, curve_(u));
        if (b <= 0.0) return 0.0;
        const double dx = jm_.tables().dx();
        int n = std::max(2, static_cast<int>(std::ceil(b / dx)));
        double h = b / n, acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            double y = i * h;
            double f = (*this)(u, y) * std::exp(m.rho() * y);
            acc += (i == 0 || i == n ? 0.5 : 1.0) * f;
        }
        return acc * h * m.lambda() * m.rho();
    }

    const JumpRows& rows() const { return rows_; }

private:
    JumpModel jm_;
    JumpRows rows_;
    std::function<double(double)> bfun_;
};

struct JumpSweep {
    std::vector<double> b;
    JumpRows rows;
    int floors = 0;
};

// Backward sweep over the u grid at fixed V(0,0).
JumpSweep jump_sweep(const GainSpec& spec, const JumpModel& jm, const std::vector<double>& ug,
                     const std::vector<double>& hg, ExtReal u_b, int max_inner)
{
    const size_t n = ug.size();
    const KernelTables& tab = jm.tables();
    const double x_cap = tab.dx() * (tab.n_x() - 2);
    JumpSweep out;
    out.b = hg;
    out.rows.u = ug;
    out.rows.v.resize(n);
    out.rows.cum.resize(n);
    out.rows.total.assign(n, 0.0);
    GridCurve c{&ug, hg, 1.0 / 3.0, u_b};
    std::function<double(double)> bfun = [&c](double v) { return c(v); };
    // Finite variation: below u_b the boundary is strictly positive (b = 0 solves
    // a row trivially), and a rising interpolant between rows opens a spurious
    // continuation strip at the start, so rows are searched from b(u_{i+1}) up.
    const bool fv = u_b.is_finite();
    const double lo_min = fv ? 1e-6 * tab.dx() : 0.0;
    for (size_t i = n; i-- > 0;) {
        if (u_b.is_finite() && ug[i] >= u_b.value()) {
            c.b[i] = 0.0;
            out.rows.v[i].assign(static_cast<size_t>(tab.n_x()), 0.0);
            out.rows.cum[i].assign(static_cast<size_t>(tab.n_x()), 0.0);
            continue;
        }
        RowLookup sv{&out.rows, &tab, &bfun, std::min(i + 1, n - 1)};
        if (i + 1 == n) {
            // the tail beyond the grid reads the row being solved; seed it with zero
            out.rows.v[i].assign(static_cast<size_t>(tab.n_x()), 0.0);
            out.rows.cum[i].assign(static_cast<size_t>(tab.n_x()), 0.0);
            sv.lag_from = i;
        }
        double prev_total = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < max_inner; ++pass) {
            auto f = [&](double x) {
                c.b[i] = x;
                return jm.formula_x(ug[i], x, bfun, sv);
            };
            int floors = 0;
            double lo = std::max(hg[i], lo_min);
            if (fv && i + 1 < n) lo = std::max(lo, c.b[i + 1]);
            double bi = boundary_root(f, lo, tab.dx(), x_cap, floors);
            c.b[i] = bi;
            fill_row(jm, spec.model(), ug[i], bi, bfun, sv, out.rows.v[i], out.rows.cum[i], out.rows.total[i]);
            sv.lag_from = i;
            if (std::abs(out.rows.total[i] - prev_total) <= 1e-9 * (1.0 + std::abs(prev_total))) {
                out.floors += floors;
                break;
            }
            prev_total = out.rows.total[i];
            if (pass + 1 == max_inner) throw SolverError("row self-consistency did not converge");
        }
    }
    out.b = c.b;
    return out;
}

double table_x_max(const GainSpec& spec, const SolverConfig& cfg)
{
    if (cfg.x_max > 0.0) return cfg.x_max;
    return 1.5 * h_curve(spec, cfg.u_min) + 2.0;
}

std::vector<double> table_s_grid(const LevyModel& m, double s_max)
{
    if (m.infinite_variation())
        return piecewise_grid({{0.0025, 0.02}, {0.01, 0.2}, {0.025, 1.0}, {0.05, 3.0}, {0.1, s_max}}, s_max);
    return piecewise_grid({{0.05, 1.0}, {0.1, 5.0}, {0.25, 20.0}, {0.5, s_max}}, s_max);
}

// Least-squares slope of V(0, x) - V(0,0) = a x + c x^2 over the first grid levels.
double jump_right_slope(const JumpModel& jm, const std::function<double(double)>& bfun, const RowLookup& sv,
                        int n_fit)
{
    double sxx = 0, sx3 = 0, sx4 = 0, sxy = 0, sx2y = 0;
    for (int j = 1; j <= n_fit; ++j) {
        double x = jm.tables().x(static_cast<size_t>(j));
        double y = jm.formula(0.0, static_cast<size_t>(j), bfun, sv) - jm.v00();
        sxx += x * x;
        sx3 += x * x * x;
        sx4 += x * x * x * x;
        sxy += x * y;
        sx2y += x * x * y;
    }
    double det = sxx * sx4 - sx3 * sx3;
    return (sxy * sx4 - sx3 * sx2y) / det;
}

Solution solve_jump(const GainSpec& spec, const SolverConfig& cfg)
{
    require_p2(spec, "solve");
    const LevyModel& model = spec.model();
    std::vector<double> ug = log_grid(cfg.u_min, cfg.u_max, cfg.n_u);
    std::vector<double> hg(ug.size());
    for (size_t i = 0; i < ug.size(); ++i) hg[i] = h_curve(spec, ug[i]);

    const double dx = cfg.table_dx > 0.0 ? cfg.table_dx : 0.1;
    const double x_max = table_x_max(spec, cfg);
    const int n_x = static_cast<int>(std::ceil(x_max / dx)) + 2;
    const double s_max = cfg.s_max > 0.0 ? cfg.s_max : (model.infinite_variation() ? 12.0 : 200.0);
    auto tab = std::make_shared<const KernelTables>(spec, table_s_grid(model, s_max), dx, n_x, cfg.mc_kernel_paths,
                                                    cfg.seed, cfg.threads);

    SolverDiagnostics d;
    d.kernel_paths = cfg.mc_kernel_paths;
    JumpSweep sw;

    auto run = [&](double v00) {
        JumpModel jm(spec, tab, v00);
        ExtReal ub = solve_u_b(spec, v00);
        sw = jump_sweep(spec, jm, ug, hg, ub, cfg.max_inner);
        ++d.outer_iterations;
        d.inner_iterations += static_cast<int>(ug.size());
        return jm;
    };

    double v00 = 0.0;
    const double lo0 = -spec.eg_p() / spec.p(), hi0 = -1e-9 * spec.eg_p();
    if (model.infinite_variation()) {
        const double target = -1.5 * model.phi_derivatives_at_zero().second;
        d.derivative_target = target;
        d.closure = "derivative matching at (0,0)";
        const int n_fit = std::max(3, static_cast<int>(std::lround(0.5 / dx)));
        auto residual = [&](double v) {
            JumpModel jm = run(v);
            GridCurve c{&ug, sw.b};
            std::function<double(double)> bfun = [&c](double x) { return c(x); };
            RowLookup sv{&sw.rows, tab.get(), &bfun, 0};
            double r = jump_right_slope(jm, bfun, sv, n_fit) - target;
            d.v00_history.push_back(v);
            d.outer_residuals.push_back(r);
            return r;
        };
        double lo = lo0, hi = hi0;
        double r_lo = residual(lo), r_hi = residual(hi);
        if (r_lo * r_hi > 0.0)
            throw SolverError("V(0,0) bracket failure: residuals " + format_number(r_lo) + ", " +
                              format_number(r_hi));
        while (hi - lo > cfg.v00_tol * std::max(1.0, std::abs(lo))) {
            if (d.outer_iterations >= cfg.max_outer) throw SolverError("V(0,0) bisection did not converge");
            double mid = 0.5 * (lo + hi);
            if ((residual(mid) < 0.0) == (r_lo < 0.0)) lo = mid; else hi = mid;
        }
        v00 = 0.5 * (lo + hi);
        d.derivative_estimate = residual(v00) + target;
    } else {
        // V(0,0) must reproduce itself through the representation at (0,0).
        d.closure = "fixed point of V(0,0) through the representation at (0,0)";
        auto residual = [&](double v) {
            JumpModel jm = run(v);
            GridCurve c{&ug, sw.b, 1.0 / 3.0, solve_u_b(spec, v)};
            std::function<double(double)> bfun = [&c](double x) { return c(x); };
            RowLookup sv{&sw.rows, tab.get(), &bfun, 0};
            double r = jm.formula(0.0, 0, bfun, sv) - v;
            d.v00_history.push_back(v);
            d.outer_residuals.push_back(r);
            return r;
        };
        double r_lo = residual(lo0), r_hi = residual(hi0);
        if (r_lo * r_hi > 0.0)
            throw SolverError("V(0,0) fixed point not bracketed: residuals " + format_number(r_lo) + ", " +
                              format_number(r_hi));
        v00 = brent_root(residual, lo0, hi0, cfg.v00_tol * std::max(1.0, std::abs(lo0)), cfg.max_outer);
        residual(v00);
    }

    JumpModel jm = run(v00);
    ExtReal ub = solve_u_b(spec, v00);
    d.h_floor_nodes = sw.floors;
    for (size_t i = 1; i < sw.b.size(); ++i)
        d.max_monotonicity_violation = std::max(d.max_monotonicity_violation, sw.b[i] - sw.b[i - 1]);

    Solution s;
    s.curve = BoundaryCurve(ug, sw.b, hg, ub, v00);
    auto surf = std::make_shared<JumpSurface>(spec, s.curve, tab, sw.rows, cfg.fd_step);
    s.surface = surf;
    for (size_t i = 0; i < ug.size(); ++i) {
        if (sw.b[i] <= 0.0) {
            d.smooth_fit.push_back(0.0);
            continue;
        }
        double res = smooth_fit_residual(*surf, ug[i]);
        d.smooth_fit.push_back(res);
        d.max_smooth_fit = std::max(d.max_smooth_fit, std::abs(res));
    }
    s.diagnostics = d;
    return s;
}

}  // namespace

Solution solve(const GainSpec& spec, const SolverConfig& cfg)
{
    cfg.check();
    if (spec.model().family() == Family::BrownianDrift) return solve_bm(spec, cfg);
    return solve_jump(spec, cfg);
}

double script_V(const ValueSurface& surface, double u, double b)
{
    if (b <= 0.0) return 0.0;
    return surface.script_v(u, b);
}

double smooth_fit_residual(const ValueSurface& surface, double u)
{
    double b = surface.curve()(u);
    if (!(b > 0.0)) throw std::invalid_argument("smooth_fit_residual: b(u) must be positive");
    double d = std::min(surface.fd_step(), 0.5 * b);
    double slope = (0.0 - surface(u, b - d)) / d;
    double ref = std::abs(surface(u, std::max(b - 0.5, 0.5 * b))) / std::min(0.5, 0.5 * b);
    if (ref == 0.0) return slope == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return slope / ref;
}

double lambda_positivity_check(const ValueSurface& surface, double u, double x)
{
    const GainSpec& spec = surface.spec();
    double g = gain(spec, u, x);
    const LevyModel& m = spec.model();
    if (!m.has_jumps()) return g;
    double b = surface.curve()(u);
    double land = surface.script_v(u, std::min(x, b)) + negative_landing_value(spec, surface.v00());
    return g + std::exp(-m.rho() * x) * land;
}

}  // namespace lastzero
