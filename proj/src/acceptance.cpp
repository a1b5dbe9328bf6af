#include "lastzero/acceptance.hpp"

#include "lastzero/boundary_solver.hpp"
#include "lastzero/path_sim.hpp"
#include "lastzero/scale_kit.hpp"
#include "lastzero/stopping_core.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

namespace lastzero {

namespace {

std::string fmt(double v, int digits = 6) { return format_number(v, digits); }

double combined_se(const MCEstimate& a, const MCEstimate& b)
{
    return std::sqrt(a.stderr_mean * a.stderr_mean + b.stderr_mean * b.stderr_mean);
}

class Runner {
public:
    Runner(const RunConfig& cfg, const std::function<void(const CriterionResult&)>& progress)
        : cfg_(cfg), spec_(cfg.model, cfg.p), progress_(progress), family_(family_name(cfg.model.family()))
    {
    }

    std::vector<CriterionResult> run()
    {
        const Family f = cfg_.model.family();
        check(1, [&] { return scale_transform(); });
        check(2, [&] { return fluctuation(); });
        if (f == Family::BrownianDrift) {
            check(3, [&] { return equivalence(); });
            check(4, [&] { return dominance(); });
            check(5, [&] { return structure(); });
            check(6, [&] { return smooth_fit(); });
        }
        check(7, [&] { return anchor_bounds(); });
        if (f == Family::BrownianDrift) check(8, [&] { return negative_half_line(); });
        if (f == Family::JumpDiffusion) check(9, [&] { return lambda_positivity(); });
        if (f == Family::CramerLundberg) check(10, [&] { return cutoff(); });
        check(11, [&] { return determinism(); });
        return results_;
    }

private:
    struct Verdict {
        bool pass;
        std::string detail;
    };

    void check(int id, const std::function<Verdict()>& body)
    {
        auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        r.id = id;
        r.family = family_;
        try {
            Verdict v = body();
            r.pass = v.pass;
            r.detail = v.detail;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results_.push_back(r);
        if (progress_) progress_(r);
    }

    double tol(double t) const { return t * cfg_.tolerance_scale; }

    const Solution& solution()
    {
        if (!solution_) solution_ = solve(spec_, cfg_.solver);
        return *solution_;
    }

    SimBudget budget(std::int64_t n) const
    {
        SimBudget b = cfg_.sim;
        b.n_paths = n;
        b.dt = 1e-2;
        return b;
    }

    Verdict scale_transform()
    {
        const ScaleFamily& fam = spec_.family();
        const LevyModel& m = cfg_.model;
        double worst = 0.0;
        for (double q : {0.0, 1.0}) {
            const double phi = m.phi(q);
            for (double shift : {0.5, 2.0}) {
                const double beta = phi + shift;
                auto f = [&](double x) { return std::exp(-beta * x) * fam.wq(q, x); };
                auto r = integrate_to_infinity(f, 0.0, shift, 1e-12, 1e-11);
                double err = std::abs(r.value - 1.0 / (m.psi(beta) - q)) + r.abs_error;
                worst = std::max(worst, err);
            }
        }
        return {worst < tol(1e-6), "max |LT - 1/(psi-q)| + quad err = " + fmt(worst, 3)};
    }

    Verdict fluctuation()
    {
        const ScaleFamily& fam = spec_.family();
        const LevyModel& m = cfg_.model;
        SimBudget b = budget(100000);
        struct Item {
            const char* name;
            Functional fn;
            double exact;
        };
        std::vector<Item> items{
            {"exit", Functional::exit_up_before_down(1.0, 2.0), fam.w(1.0) / fam.w(2.0)},
            {"ruin", Functional::ruin_prob(1.0), 1.0 - m.psi_prime(0.0) * fam.w(1.0)},
            {"laplace_g", Functional::laplace_g(1.0, 0.0), fam.g_laplace(1.0, 0.0)},
        };
        bool ok = true;
        std::ostringstream os;
        for (const Item& it : items) {
            MCEstimate e = estimate_functional(m, it.fn, b);
            double z = (e.mean - it.exact) / e.stderr_mean;
            ok = ok && std::abs(z) <= tol(3.0);
            os << it.name << " " << fmt(e.mean) << "+-" << fmt(e.stderr_mean, 2) << " vs " << fmt(it.exact)
               << " (z=" << fmt(z, 2) << ") ";
        }
        return {ok, os.str()};
    }

    const std::vector<MCEstimate>& rule_sweep()
    {
        if (sweep_.empty()) {
            auto curve = std::make_shared<const BoundaryCurve>(solution().curve);
            std::vector<StoppingRule> rules{StoppingRule::boundary(curve), StoppingRule::immediate()};
            for (double a : barriers_) rules.push_back(StoppingRule::barrier(a));
            sweep_ = estimate_prediction_errors(cfg_.model, rules, cfg_.p, 0.0, budget(100000));
        }
        return sweep_;
    }

    Verdict equivalence()
    {
        const auto& s = rule_sweep();
        double target = value_conversion(spec_, solution().curve.v00());
        double z = (s[0].mean - target) / s[0].stderr_mean;
        return {std::abs(z) <= tol(3.0), "MC E|tau_D-g|^p = " + fmt(s[0].mean) + "+-" + fmt(s[0].stderr_mean, 2) +
                                             " vs pV00+E(g^p) = " + fmt(target) + " (z=" + fmt(z, 2) + ")"};
    }

    Verdict dominance()
    {
        const auto& s = rule_sweep();
        bool ok = true;
        std::ostringstream os;
        os << "boundary " << fmt(s[0].mean, 5) << "; immediate " << fmt(s[1].mean, 5);
        ok = s[0].mean <= s[1].mean + tol(2.0) * combined_se(s[0], s[1]);
        for (size_t i = 0; i < barriers_.size(); ++i) {
            const MCEstimate& e = s[i + 2];
            bool pass = s[0].mean <= e.mean + tol(2.0) * combined_se(s[0], e);
            ok = ok && pass;
            os << "; a=" << fmt(barriers_[i], 2) << " " << fmt(e.mean, 5) << (pass ? "" : " (violated)");
        }
        return {ok, os.str()};
    }

    Verdict structure()
    {
        const BoundaryCurve& c = solution().curve;
        const auto& b = c.b_values();
        const auto& h = c.h_values();
        double worst_mono = 0.0, worst_h = 0.0;
        for (size_t i = 0; i < b.size(); ++i) {
            if (i > 0) worst_mono = std::max(worst_mono, b[i] - b[i - 1]);
            worst_h = std::max(worst_h, h[i] - b[i]);
        }
        double b_small = c(1e-2), b_one = c(1.0);
        double tail_gap = std::abs(b.back() - h.back());
        bool ok = worst_mono <= 0.0 && worst_h <= 0.0 && b_small >= 2.0 * b_one && tail_gap < tol(5e-2);
        std::ostringstream os;
        os << "max increase " << fmt(worst_mono, 3) << ", max(h-b) " << fmt(worst_h, 3) << ", b(0.01)/b(1) "
           << fmt(b_small / b_one, 4) << ", |b-h| at u_max=" << fmt(c.u_max(), 4) << ": " << fmt(tail_gap, 4);
        return {ok, os.str()};
    }

    Verdict smooth_fit()
    {
        const Solution& sol = solution();
        double base = 0.0;
        size_t at = 0;
        for (size_t i = 0; i < sol.diagnostics.smooth_fit.size(); ++i)
            if (std::abs(sol.diagnostics.smooth_fit[i]) > base) {
                base = std::abs(sol.diagnostics.smooth_fit[i]);
                at = i;
            }
        auto shifted = make_bm_surface(spec_, sol.curve.shifted(0.3), cfg_.solver);
        double pert = 0.0;
        for (double u : sol.curve.u_grid()) pert = std::max(pert, std::abs(smooth_fit_residual(*shifted, u)));
        bool ok = base < tol(1e-2) && pert >= 5.0 * base;
        return {ok, "max residual " + fmt(base, 3) + " at u=" + fmt(sol.curve.u_grid()[at], 4) +
                        "; with b+0.3: " + fmt(pert, 3) + " (x" + fmt(pert / base, 3) + ")"};
    }

    Verdict anchor_bounds()
    {
        double v = solution().curve.v00();
        double lo = -spec_.eg_p() / spec_.p();
        return {v >= lo && v < 0.0, "V00 = " + fmt(v, 8) + " in [" + fmt(lo, 6) + ", 0)"};
    }

    Verdict negative_half_line()
    {
        const double x = -1.0;
        double v00 = solution().curve.v00();
        GainSpec spec = spec_;
        auto fn = Functional::integral_to_up_crossing(x, [spec](double y) { return gain(spec, 0.0, y); });
        MCEstimate e = estimate_functional(cfg_.model, fn, budget(100000));
        double mc = e.mean + v00;
        double exact = v0_on_negatives(spec_, v00, x);
        double z = (mc - exact) / e.stderr_mean;
        return {std::abs(z) <= tol(3.0), "MC " + fmt(mc) + "+-" + fmt(e.stderr_mean, 2) + " vs closed form " +
                                             fmt(exact) + " (z=" + fmt(z, 2) + ")"};
    }

    Verdict lambda_positivity()
    {
        const Solution& sol = solution();
        const BoundaryCurve& c = sol.curve;
        double worst = std::numeric_limits<double>::infinity();
        double wu = 0.0, wx = 0.0;
        const double lu = std::log(c.u_min()), hu = std::log(c.u_max());
        for (int i = 0; i < 10; ++i) {
            double u = std::exp(lu + (hu - lu) * i / 9.0);
            for (int k = 1; k <= 10; ++k) {
                double x = c(u) + 0.5 * k;
                double v = lambda_positivity_check(*sol.surface, u, x);
                if (v < worst) {
                    worst = v;
                    wu = u;
                    wx = x;
                }
            }
        }
        return {worst > -tol(1e-3), "min Lambda = " + fmt(worst, 4) + " at (u,x)=(" + fmt(wu, 4) + "," + fmt(wx, 4) + ")"};
    }

    Verdict cutoff()
    {
        const BoundaryCurve& c = solution().curve;
        if (c.u_b().is_infinite()) return {false, "u_b infinite"};
        double ub = c.u_b().value(), v00 = c.v00();
        double r_lo = u_b_residual(spec_, v00, 0.9 * ub).value();
        double r_hi = u_b_residual(spec_, v00, 1.1 * ub).value();
        bool sign = (r_lo < 0.0) != (r_hi < 0.0);
        bool zero_above = true, positive_below = true, any_above = false;
        for (size_t i = 0; i < c.u_grid().size(); ++i) {
            double u = c.u_grid()[i], b = c.b_values()[i];
            if (u > ub) {
                any_above = true;
                zero_above = zero_above && b == 0.0;
            } else if (u < ub) {
                positive_below = positive_below && b > 0.0;
            }
        }
        std::ostringstream os;
        os << "u_b = " << fmt(ub, 8) << ", residual " << fmt(r_lo, 3) << " -> " << fmt(r_hi, 3)
           << ", b=0 above: " << (zero_above && any_above ? "yes" : "no")
           << ", b>0 below: " << (positive_below ? "yes" : "no");
        return {sign && zero_above && any_above && positive_below, os.str()};
    }

    Verdict determinism()
    {
        SolverConfig sc = cfg_.solver;
        if (cfg_.model.family() != Family::BrownianDrift) sc.mc_kernel_paths = std::min<std::int64_t>(sc.mc_kernel_paths, 20000);
        std::string a = solve(spec_, sc).curve.to_csv();
        std::string b = solve(spec_, sc).curve.to_csv();
        bool solve_same = a == b;

        std::vector<StoppingRule> rules{StoppingRule::immediate(), StoppingRule::barrier(1.0)};
        SimBudget sb = budget(20000);
        auto r1 = estimate_prediction_errors(cfg_.model, rules, cfg_.p, 0.0, sb);
        auto r2 = estimate_prediction_errors(cfg_.model, rules, cfg_.p, 0.0, sb);
        bool sim_same = true;
        for (size_t i = 0; i < rules.size(); ++i)
            sim_same = sim_same && r1[i].mean == r2[i].mean && r1[i].stderr_mean == r2[i].stderr_mean &&
                       r1[i].censored_fraction == r2[i].censored_fraction;
        sb.seed += 0x9e3779b97f4a7c15ULL;
        auto r3 = estimate_prediction_errors(cfg_.model, rules, cfg_.p, 0.0, sb);
        double worst = 0.0;
        for (size_t i = 0; i < rules.size(); ++i)
            worst = std::max(worst, std::abs(r1[i].mean - r3[i].mean) / combined_se(r1[i], r3[i]));
        std::ostringstream os;
        os << "solve identical: " << (solve_same ? "yes" : "no") << ", simulate identical: " << (sim_same ? "yes" : "no")
           << ", disjoint seeds max z = " << fmt(worst, 3);
        return {solve_same && sim_same && worst <= tol(3.0), os.str()};
    }

    const RunConfig& cfg_;
    GainSpec spec_;
    std::function<void(const CriterionResult&)> progress_;
    std::string family_;
    std::optional<Solution> solution_;
    std::vector<double> barriers_{0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
    std::vector<MCEstimate> sweep_;
    std::vector<CriterionResult> results_;
};

}  // namespace

std::vector<CriterionResult> run_criteria(const RunConfig& cfg, const std::function<void(const CriterionResult&)>& progress)
{
    return Runner(cfg, progress).run();
}

std::string format_result(const CriterionResult& r)
{
    std::ostringstream os;
    os << "criterion " << r.id << " [" << r.family << "] " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail << "  ("
       << format_number(r.seconds, 3) << " s)";
    return os.str();
}

}  // namespace lastzero
