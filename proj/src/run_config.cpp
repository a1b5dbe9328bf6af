#include "lastzero/run_config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lastzero {

namespace {

std::string trim(const std::string& s)
{
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("bad number for " + key + ": '" + v + "'");
    return out;
}

template <class I>
I to_int(const std::string& key, const std::string& v)
{
    I out{};
    auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("bad integer for " + key + ": '" + v + "'");
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

}  // namespace

Family parse_family(const std::string& name)
{
    if (name == "brownian_drift") return Family::BrownianDrift;
    if (name == "jump_diffusion") return Family::JumpDiffusion;
    if (name == "cramer_lundberg") return Family::CramerLundberg;
    throw ConfigError("unknown model.family '" + name + "'");
}

RunConfig RunConfig::defaults(Family f)
{
    RunConfig c;
    switch (f) {
    case Family::BrownianDrift: c.model = LevyModel::brownian_drift(0.5, 1.0); break;
    case Family::JumpDiffusion: c.model = LevyModel::jump_diffusion(3.0, 1.0, 1.0, 1.0); break;
    case Family::CramerLundberg: c.model = LevyModel::cramer_lundberg(1.5, 1.0, 1.0); break;
    }
    c.solver = SolverConfig::defaults_for(c.model);
    return c;
}

RunConfig RunConfig::parse(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty() || v.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(k, v).second) throw ConfigError("line " + std::to_string(lineno) + ": repeated key " + k);
    }

    Family fam = Family::BrownianDrift;
    if (auto it = kv.find("model.family"); it != kv.end()) fam = parse_family(it->second);
    RunConfig c = defaults(fam);
    std::set<std::string> used{"model.family"};
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        if (it == kv.end()) return nullptr;
        used.insert(k);
        return &it->second;
    };
    auto num = [&](const std::string& k, double fallback) {
        const std::string* v = get(k);
        return v ? to_double(k, *v) : fallback;
    };

    // model
    const LevyModel& d = c.model;
    switch (fam) {
    case Family::BrownianDrift:
        c.model = LevyModel::brownian_drift(num("model.mu", d.drift()), num("model.sigma", d.sigma()));
        break;
    case Family::JumpDiffusion:
        c.model = LevyModel::jump_diffusion(num("model.mu", d.drift()), num("model.sigma", d.sigma()),
                                            num("model.lambda", d.lambda()), num("model.rho", d.rho()));
        break;
    case Family::CramerLundberg:
        c.model = LevyModel::cramer_lundberg(num("model.c", d.drift()), num("model.lambda", d.lambda()),
                                             num("model.rho", d.rho()));
        break;
    }
    c.p = MomentOrder(num("p", 2.0));

    SolverConfig& s = c.solver;
    s.u_min = num("solver.u_min", s.u_min);
    s.u_max = num("solver.u_max", s.u_max);
    if (auto v = get("solver.n_u")) s.n_u = to_int<int>("solver.n_u", *v);
    if (auto v = get("solver.r_nodes")) s.r_nodes = to_int<int>("solver.r_nodes", *v);
    s.r_max = num("solver.r_max", s.r_max);
    s.damping = num("solver.damping", s.damping);
    s.tol_fixed_point = num("solver.tol_fixed_point", s.tol_fixed_point);
    s.tol_smooth_fit = num("solver.tol_smooth_fit", s.tol_smooth_fit);
    if (auto v = get("solver.max_outer")) s.max_outer = to_int<int>("solver.max_outer", *v);
    if (auto v = get("solver.max_inner")) s.max_inner = to_int<int>("solver.max_inner", *v);
    s.fd_step = num("solver.fd_step", s.fd_step);
    s.v00_tol = num("solver.v00_tol", s.v00_tol);
    if (auto v = get("solver.mc_kernel_paths")) s.mc_kernel_paths = to_int<std::int64_t>("solver.mc_kernel_paths", *v);
    if (auto v = get("solver.seed")) s.seed = to_int<std::uint64_t>("solver.seed", *v);
    s.x_max = num("solver.x_max", s.x_max);
    s.table_dx = num("solver.table_dx", s.table_dx);
    s.s_max = num("solver.s_max", s.s_max);
    if (auto v = get("solver.threads")) s.threads = to_int<int>("solver.threads", *v);
    try {
        s.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    SimBudget& b = c.sim;
    if (auto v = get("sim.n_paths")) b.n_paths = to_int<std::int64_t>("sim.n_paths", *v);
    b.horizon = num("sim.horizon", b.horizon);
    b.dt = num("sim.dt", b.dt);
    if (auto v = get("sim.master_seed")) b.seed = to_int<std::uint64_t>("sim.master_seed", *v);
    if (auto v = get("sim.threads")) b.threads = to_int<int>("sim.threads", *v);
    if (b.n_paths < 2 || !(b.horizon > 0.0) || !(b.dt > 0.0 && b.dt <= 0.05) || b.threads < 0)
        throw ConfigError("sim: need n_paths >= 2, horizon > 0, 0 < dt <= 0.05, threads >= 0");

    if (auto v = get("value.u")) c.value.u = to_list("value.u", *v);
    c.value.x_min = num("value.x_min", c.value.x_min);
    c.value.x_max = num("value.x_max", c.value.x_max);
    if (auto v = get("value.n_x")) c.value.n_x = to_int<int>("value.n_x", *v);
    if (c.value.n_x < 2) throw ConfigError("value.n_x must be at least 2");
    for (double u : c.value.u)
        if (u < 0.0) throw ConfigError("value.u entries must be non-negative");

    c.tolerance_scale = num("validate.tolerance_scale", 1.0);
    if (!(c.tolerance_scale > 0.0)) throw ConfigError("validate.tolerance_scale must be positive");
    if (auto v = get("output.dir")) c.output_dir = *v;

    for (const auto& [k, v] : kv)
        if (!used.count(k)) throw ConfigError("unknown key '" + k + "'");
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

}  // namespace lastzero
