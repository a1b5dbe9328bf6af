#include "lastzero/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace lastzero;

int main(int argc, char** argv)
{
    CLI::App app{"Optimal prediction of the last zero of a spectrally negative Levy process"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> rules;
    std::uint64_t seed = 0;
    bool strict = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value configuration file");
        sub->add_option("--out", out_dir, "output directory (default: output.dir)");
        sub->add_option("--seed", seed, "master seed for simulation and kernel tables");
    };
    CLI::App* check = app.add_subcommand("model-check", "report model quantities and the moment gate");
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve for b(u) and V(0,0); write boundary.csv, value.csv");
    CLI::App* value = app.add_subcommand("value", "write value.csv");
    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo E|tau - g|^p for stopping rules; write sim.csv");
    CLI::App* val = app.add_subcommand("validate", "run the acceptance checks for the configured family");
    for (CLI::App* s : {check, solve_cmd, value, sim, val}) add_common(s);
    sim->add_option("--rule", rules, "boundary:<csv>, barrier:<a>, immediate or oracle (repeatable)")->required();
    sim->add_flag("--strict", strict, "exit 4 if censoring makes an estimate unreliable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kMalformed;
    }

    RunConfig cfg;
    try {
        cfg = config_path.empty() ? RunConfig::defaults(Family::BrownianDrift) : RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kMalformed;
    } catch (const ModelError& e) {
        std::cerr << "model: " << e.what() << "\n";
        return kRejected;
    }
    if (seed != 0) {
        cfg.sim.seed = seed;
        cfg.solver.seed = seed;
    }
    if (out_dir.empty()) out_dir = cfg.output_dir;

    try {
        if (*check) return cmd_model_check(cfg, std::cout);
        if (*solve_cmd) return cmd_solve(cfg, out_dir, std::cout);
        if (*value) return cmd_value(cfg, out_dir, std::cout);
        if (*sim) return cmd_simulate(cfg, rules, out_dir, strict, std::cout);
        return cmd_validate(cfg, std::cout);
    } catch (const SolverError& e) {
        std::cerr << "solver: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const NumericError& e) {
        std::cerr << "numerics: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const ModelError& e) {
        std::cerr << "model: " << e.what() << "\n";
        return kRejected;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input: " << e.what() << "\n";
        return kMalformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    }
}
