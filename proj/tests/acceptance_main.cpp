// Acceptance run over the three reference models. Prints one line per
// criterion; exits non-zero if any criterion fails.
#include "lastzero/acceptance.hpp"

#include <cstdio>
#include <iostream>
#include <map>

using namespace lastzero;

int main()
{
    std::map<int, std::vector<CriterionResult>> by_id;
    for (Family f : {Family::BrownianDrift, Family::JumpDiffusion, Family::CramerLundberg}) {
        RunConfig cfg = RunConfig::defaults(f);
        for (const auto& r : run_criteria(cfg, [](const CriterionResult& r) { std::cerr << format_result(r) << std::endl; }))
            by_id[r.id].push_back(r);
    }
    bool all = true;
    for (int id = 1; id <= 11; ++id) {
        const auto& rs = by_id[id];
        bool ok = !rs.empty();
        double secs = 0.0;
        std::string detail;
        for (const auto& r : rs) {
            ok = ok && r.pass;
            secs += r.seconds;
            if (!detail.empty()) detail += " | ";
            detail += r.family + ": " + r.detail;
        }
        all = all && ok;
        std::printf("criterion %2d %s  (%.1f s)  %s\n", id, ok ? "PASS" : "FAIL", secs, detail.c_str());
    }
    std::fflush(stdout);
    return all ? 0 : 1;
}
