#include "lastzero/cli.hpp"

#include "lastzero/acceptance.hpp"
#include "lastzero/scale_kit.hpp"
#include "lastzero/stopping_core.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lastzero {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string num(double v) { return format_number(v, 12); }

// JSON has no infinity; the sentinel travels as the string "inf".
ordered_json jnum(double v)
{
    if (std::isnan(v)) throw NumericError("refusing to serialise NaN");
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

ordered_json quantity(double v, const std::string& provenance)
{
    return ordered_json{{"value", jnum(v)}, {"provenance", provenance}};
}

ordered_json quantity(const ExtReal& v, const std::string& provenance)
{
    return ordered_json{{"value", v.is_finite() ? ordered_json(v.value()) : ordered_json("inf")},
                        {"provenance", provenance}};
}

void write_file(const fs::path& path, const std::string& text)
{
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

bool gate(const RunConfig& cfg, std::ostream& out)
{
    Validation v = validate(cfg.model, cfg.p);
    if (!v.ok) out << "rejected (" << v.clause << "): " << v.reason << "\n";
    return v.ok;
}

ordered_json model_json(const RunConfig& cfg)
{
    return ordered_json{{"model", cfg.model.describe()}, {"p", cfg.p.p()}};
}

}  // namespace

StoppingRule parse_rule(const std::string& spec)
{
    if (spec == "immediate") return StoppingRule::immediate();
    if (spec == "oracle") return StoppingRule::oracle();
    if (spec.rfind("barrier:", 0) == 0) {
        std::string a = spec.substr(8);
        size_t used = 0;
        double level = 0.0;
        try {
            level = std::stod(a, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != a.size() || !std::isfinite(level) || level < 0.0)
            throw std::invalid_argument("bad barrier level in '" + spec + "'");
        return StoppingRule::barrier(level);
    }
    if (spec.rfind("boundary:", 0) == 0) {
        std::ifstream f(spec.substr(9), std::ios::binary);
        if (!f) throw std::invalid_argument("cannot read boundary file '" + spec.substr(9) + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return StoppingRule::boundary(std::make_shared<const BoundaryCurve>(BoundaryCurve::from_csv(ss.str())));
    }
    throw std::invalid_argument("unknown rule '" + spec + "'");
}

std::string value_csv(const ValueSurface& surface, const ValueGrid& grid)
{
    const BoundaryCurve& c = surface.curve();
    double x_max = grid.x_max > 0.0 ? grid.x_max : 1.1 * c(c.u_min());
    std::string s = "u,x,V\n";
    for (double u : grid.u) {
        for (int k = 0; k < grid.n_x; ++k) {
            double x = grid.x_min + (x_max - grid.x_min) * k / (grid.n_x - 1);
            // the excursion clock is zero whenever X <= 0
            if (u > 0.0 && x <= 0.0) continue;
            s += num(u) + "," + num(x) + "," + num(surface(u, x)) + "\n";
        }
    }
    return s;
}

std::string sim_csv(const std::vector<std::string>& labels, const std::vector<MCEstimate>& est)
{
    std::string s = "rule,n_paths,mean,stderr,censored_fraction,seed\n";
    for (size_t i = 0; i < est.size(); ++i)
        s += csv_field(labels[i]) + "," + std::to_string(est[i].n_paths) + "," + num(est[i].mean) + "," +
             num(est[i].stderr_mean) + "," + num(est[i].censored_fraction) + "," + std::to_string(est[i].master_seed) +
             "\n";
    return s;
}

int cmd_model_check(const RunConfig& cfg, std::ostream& out)
{
    const LevyModel& m = cfg.model;
    out << "model            " << m.describe() << "\n";
    out << "p                " << num(cfg.p.p()) << "\n";
    out << "variation        " << (m.infinite_variation() ? "unbounded" : "bounded") << "\n";
    Validation v = validate(m, cfg.p);
    if (m.psi_prime(0.0) > 0.0) {
        auto [d1, d2] = m.phi_derivatives_at_zero();
        out << "psi'(0+)         " << num(m.psi_prime(0.0)) << "\n";
        out << "Phi'(0)          " << num(d1) << "\n";
        out << "Phi''(0)         " << num(d2) << "\n";
    } else {
        out << "psi'(0+)         " << num(m.psi_prime(0.0)) << "\n";
    }
    if (!v.ok) {
        out << "verdict          rejected (" << v.clause << "): " << v.reason << "\n";
        return kRejected;
    }
    GainSpec spec(m, cfg.p);
    out << "E(g^p)           " << num(spec.eg_p()) << "  [" << provenance_name(spec.eg_p_quantity().provenance) << "]\n";
    out << "verdict          ok\n";
    return kOk;
}

int cmd_solve(const RunConfig& cfg, const std::string& out_dir, std::ostream& out)
{
    if (!gate(cfg, out)) return kRejected;
    GainSpec spec(cfg.model, cfg.p);
    Solution sol = solve(spec, cfg.solver);
    const SolverDiagnostics& d = sol.diagnostics;
    const bool mc = cfg.model.family() != Family::BrownianDrift;
    const std::string how = mc ? "fixed point on Monte Carlo kernel tables (" + std::to_string(d.kernel_paths) +
                                     " paths, seed " + std::to_string(cfg.solver.seed) + ")"
                               : "fixed point on Gauss-Legendre quadrature";

    ordered_json rep = model_json(cfg);
    rep["V00"] = quantity(sol.curve.v00(), how + "; closure: " + d.closure);
    rep["V_star"] = quantity(value_conversion(spec, sol.curve.v00()), "pV00 + E(g^p)");
    rep["E_g_p"] = quantity(spec.eg_p(), provenance_name(spec.eg_p_quantity().provenance));
    rep["u_b"] = quantity(sol.curve.u_b(), mc ? "closed form at the solved V00" : "closed form");
    rep["u_h_star"] = quantity(u_h_star(spec), "closed form");
    rep["max_smooth_fit_residual"] = quantity(d.max_smooth_fit, "finite difference on the value surface");
    rep["smooth_fit_ok"] = d.max_smooth_fit <= cfg.solver.tol_smooth_fit;
    rep["max_monotonicity_violation"] = quantity(d.max_monotonicity_violation, "grid");
    if (!mc) rep["max_reflected_term"] = quantity(d.max_reflected_term, "quadrature");
    if (cfg.model.infinite_variation()) {
        rep["derivative_target"] = quantity(d.derivative_target, "closed form");
        rep["derivative_estimate"] = quantity(d.derivative_estimate, how);
    }
    rep["outer_iterations"] = d.outer_iterations;
    rep["inner_iterations"] = d.inner_iterations;
    rep["h_floor_nodes"] = d.h_floor_nodes;
    ordered_json hist = ordered_json::array();
    for (size_t i = 0; i < d.v00_history.size(); ++i)
        hist.push_back({jnum(d.v00_history[i]), jnum(d.outer_residuals[i])});
    rep["v00_history"] = hist;

    fs::path dir(out_dir);
    write_file(dir / "boundary.csv", sol.curve.to_csv());
    write_file(dir / "value.csv", value_csv(*sol.surface, cfg.value));
    write_file(dir / "report.json", rep.dump(2) + "\n");
    out << "V00 = " << num(sol.curve.v00()) << ", u_b = " << sol.curve.u_b().to_string()
        << ", max smooth-fit residual = " << num(d.max_smooth_fit) << "\n";
    out << "wrote " << (dir / "boundary.csv").string() << ", value.csv, report.json\n";
    return kOk;
}

int cmd_value(const RunConfig& cfg, const std::string& out_dir, std::ostream& out)
{
    if (!gate(cfg, out)) return kRejected;
    GainSpec spec(cfg.model, cfg.p);
    Solution sol = solve(spec, cfg.solver);
    fs::path path = fs::path(out_dir) / "value.csv";
    write_file(path, value_csv(*sol.surface, cfg.value));
    out << "wrote " << path.string() << "\n";
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, const std::vector<std::string>& rules, const std::string& out_dir, bool strict,
                 std::ostream& out)
{
    if (!gate(cfg, out)) return kRejected;
    std::vector<StoppingRule> parsed;
    for (const std::string& r : rules) parsed.push_back(parse_rule(r));
    auto est = estimate_prediction_errors(cfg.model, parsed, cfg.p, 0.0, cfg.sim);
    fs::path path = fs::path(out_dir) / "sim.csv";
    write_file(path, sim_csv(rules, est));
    bool unreliable = false;
    for (size_t i = 0; i < est.size(); ++i) {
        out << rules[i] << ": " << num(est[i].mean) << " +- " << num(est[i].stderr_mean)
            << "  censored " << num(est[i].censored_fraction) << (est[i].unreliable ? "  UNRELIABLE" : "") << "\n";
        unreliable = unreliable || est[i].unreliable;
    }
    out << "wrote " << path.string() << "\n";
    if (strict && unreliable) {
        out << "strict: censoring makes at least one estimate unreliable\n";
        return kStrictCensoring;
    }
    return kOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out)
{
    if (!gate(cfg, out)) return kRejected;
    bool ok = true;
    auto results = run_criteria(cfg, [&](const CriterionResult& r) { out << format_result(r) << std::endl; });
    for (const auto& r : results) ok = ok && r.pass;
    out << (ok ? "all applicable criteria passed" : "validation failed") << "\n";
    return ok ? kOk : kValidateFailure;
}

}  // namespace lastzero
