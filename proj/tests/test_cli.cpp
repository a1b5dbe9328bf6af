#include "lastzero/cli.hpp"

#include <doctest.h>

#include <sstream>

using namespace lastzero;

TEST_CASE("config parsing")
{
    RunConfig c = RunConfig::parse("# comment\nmodel.family = cramer_lundberg\nmodel.c = 2\np=2\nsim.n_paths=500\n"
                                   "value.u = 0, 1\noutput.dir = out\n");
    CHECK(c.model.family() == Family::CramerLundberg);
    CHECK(c.model.drift() == 2.0);
    CHECK(c.model.lambda() == 1.0);
    CHECK(c.sim.n_paths == 500);
    CHECK(c.value.u.size() == 2);
    CHECK(c.output_dir == "out");
    CHECK(c.solver.u_max > 300.0);
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(RunConfig::parse("model.family = brownian_drift\nmodel.c = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("p = 2\np = 3\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("p 2\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("p = two\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("model.family = levy\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("sim.dt = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("model.sigma = -1\n"), ModelError);
}

TEST_CASE("rule specs")
{
    CHECK(parse_rule("immediate").kind() == StoppingRule::Kind::Immediate);
    CHECK(parse_rule("oracle").kind() == StoppingRule::Kind::Oracle);
    CHECK(parse_rule("barrier:2.5").level() == 2.5);
    CHECK_THROWS(parse_rule("barrier:x"));
    CHECK_THROWS(parse_rule("barrier:-1"));
    CHECK_THROWS(parse_rule("boundary:/nonexistent.csv"));
    CHECK_THROWS(parse_rule("smart"));
}

TEST_CASE("sim.csv layout")
{
    MCEstimate e;
    e.mean = 1.5;
    e.stderr_mean = 0.25;
    e.n_paths = 10;
    e.master_seed = 9;
    std::string s = sim_csv({"barrier:1"}, {e});
    CHECK(s == "rule,n_paths,mean,stderr,censored_fraction,seed\nbarrier:1,10,1.5,0.25,0,9\n");
}

TEST_CASE("model-check exit codes")
{
    std::ostringstream out;
    CHECK(cmd_model_check(RunConfig::defaults(Family::BrownianDrift), out) == kOk);
    RunConfig bad = RunConfig::parse("model.family = jump_diffusion\nmodel.mu = 1\nmodel.lambda = 2\n");
    std::ostringstream out2;
    CHECK(cmd_model_check(bad, out2) == kRejected);
    CHECK(out2.str().find("drift") != std::string::npos);
}
