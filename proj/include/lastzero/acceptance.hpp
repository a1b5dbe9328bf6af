// Acceptance checks 1-11, grouped by the family they apply to.
#pragma once

#include "lastzero/run_config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lastzero {

struct CriterionResult {
    int id = 0;
    std::string family;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs every criterion applicable to cfg's family. Tolerances are multiplied
// by cfg.tolerance_scale. progress, when set, sees each result as it lands.
std::vector<CriterionResult> run_criteria(const RunConfig& cfg,
                                          const std::function<void(const CriterionResult&)>& progress = {});

std::string format_result(const CriterionResult& r);

}  // namespace lastzero
