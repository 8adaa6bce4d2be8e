#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oomcraft/run_config.hpp"

using namespace oomcraft;
namespace fs = std::filesystem;

namespace {

fs::path write_temp_config(const std::string& body) {
    fs::path p = fs::temp_directory_path() /
                 ("oomcraft_cfg_" + std::to_string(std::random_device{}()) + ".ini");
    std::ofstream out(p);
    out << body;
    return p;
}

} // namespace

TEST_CASE("config files parse sections, comments and values") {
    fs::path p = write_temp_config(
        "# comment\n[sim]\nbeta = 0.5\nn_steps = 400\n\n[learner]\nm = 6\n[plan]\nT_grid = "
        "50, 200\nestimators = binless-oom ,empirical\n");
    RunConfig cfg = RunConfig::from_file(p);
    CHECK(cfg.get_real("sim", "beta", 0.0) == doctest::Approx(0.5));
    CHECK(cfg.get_long("sim", "n_steps", 0) == 400);

    SimConfig sim = build_sim_config(cfg, SystemId::Wells1D);
    CHECK(sim.beta == doctest::Approx(0.5));
    CHECK(sim.dt == doctest::Approx(0.002));  // untouched default

    ExperimentPlan plan = build_plan(cfg, "2c");
    CHECK(plan.learner.m == 6);
    REQUIRE(plan.t_grid.size() == 2);
    CHECK(plan.t_grid[1] == 200);
    REQUIRE(plan.estimators.size() == 2);
    CHECK(plan.estimators[0] == EstimatorKind::Binless);
    fs::remove(p);
}

TEST_CASE("unknown keys and sections are errors naming the offender") {
    fs::path p = write_temp_config("[sim]\nbetta = 0.5\n");
    try {
        RunConfig::from_file(p);
        FAIL("expected InvalidInputError");
    } catch (const InvalidInputError& e) {
        CHECK(std::string(e.what()).find("betta") != std::string::npos);
    }
    fs::remove(p);

    fs::path p2 = write_temp_config("[simulation]\nbeta = 0.5\n");
    CHECK_THROWS_AS(RunConfig::from_file(p2), InvalidInputError);
    fs::remove(p2);

    RunConfig cfg;
    CHECK_THROWS_AS(cfg.set("plan", "budgets", "10"), InvalidInputError);
}

TEST_CASE("cli overrides replace file values") {
    fs::path p = write_temp_config("[plan]\nbudget = 1000\n");
    RunConfig cfg = RunConfig::from_file(p);
    cfg.set("plan", "budget", "5000");
    CHECK(cfg.get_long("plan", "budget", 0) == 5000);
    fs::remove(p);
}

TEST_CASE("bad numeric literals in config are input errors") {
    RunConfig cfg;
    cfg.set("sim", "beta", "warm");
    CHECK_THROWS_AS(cfg.get_real("sim", "beta", 1.0), IoError);
    cfg.set("plan", "budget", "12.5");
    CHECK_THROWS_AS(cfg.get_long("plan", "budget", 0), InvalidInputError);
    cfg.set("plan", "T_grid", "50,abc");
    CHECK_THROWS_AS(build_plan(cfg, "2c"), InvalidInputError);
}

TEST_CASE("system defaults and figure plans") {
    RunConfig cfg;
    SimConfig s1 = build_sim_config(cfg, SystemId::Wells1D);
    CHECK(s1.beta == doctest::Approx(0.3));
    CHECK(s1.init_hi(0) == doctest::Approx(0.2));
    SimConfig s2 = build_sim_config(cfg, SystemId::Mixture2D);
    CHECK(s2.beta == doctest::Approx(2.0));
    CHECK(s2.dt == doctest::Approx(0.01));
    CHECK(s2.init_lo.size() == 2);

    ExperimentPlan p2b = build_plan(cfg, "2b");
    CHECK(p2b.benchmark == BenchmarkId::Wells1D);
    CHECK(p2b.estimators.size() == 3);
    ExperimentPlan p3b = build_plan(cfg, "3b");
    CHECK(p3b.benchmark == BenchmarkId::Tica2D);
    CHECK(p3b.t_grid.back() == 2500);
    CHECK_THROWS_AS(build_plan(cfg, "9z"), InvalidInputError);

    CHECK_THROWS_AS(system_from_name("3d"), InvalidInputError);
}
