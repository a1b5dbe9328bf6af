// Subcommands behind the lastzero executable. Each returns a process exit code.
#pragma once

#include "lastzero/boundary_solver.hpp"
#include "lastzero/path_sim.hpp"
#include "lastzero/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lastzero {

enum ExitCode : int {
    kOk = 0,
    kMalformed = 1,
    kRejected = 2,
    kNonConvergence = 3,
    kStrictCensoring = 4,
    kValidateFailure = 5,
};

int cmd_model_check(const RunConfig& cfg, std::ostream& out);
// boundary.csv, value.csv and report.json under out_dir.
int cmd_solve(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);
// value.csv only.
int cmd_value(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);
// rules: boundary:<path>, barrier:<a>, immediate, oracle. Writes sim.csv.
int cmd_simulate(const RunConfig& cfg, const std::vector<std::string>& rules, const std::string& out_dir,
                 bool strict, std::ostream& out);
int cmd_validate(const RunConfig& cfg, std::ostream& out);

// Parses one --rule value; throws std::invalid_argument.
StoppingRule parse_rule(const std::string& spec);

std::string value_csv(const ValueSurface& surface, const ValueGrid& grid);
std::string sim_csv(const std::vector<std::string>& labels, const std::vector<MCEstimate>& est);

}  // namespace lastzero
