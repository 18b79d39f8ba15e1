#include "h2ds/errors.hpp"
#include "h2ds/experiments.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace h2ds;

namespace {

ExperimentPlan quick_plan() {
    ExperimentPlan p = default_matrix_plan();
    p.countries = {Country::Norway};
    p.storages = {Storage::SaltCavern};
    p.rhos = {1.0};
    p.sim.periods = 6000;
    p.sim.warmup = 1000;
    p.tuning_periods = kMinTuningPeriods;
    return p;
}

std::string csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_table(os, rows, TableFormat::Csv);
    return os.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("h2ds_test_" + name);
}

}  // namespace

TEST_CASE("policy names") {
    CHECK(parse_policy_kind("FOQ+") == PolicyKind::FOQPlus);
    CHECK(parse_policy_kind("tbs") == PolicyKind::TBS);
    CHECK(parse_policy_kind("Benchmarks") == PolicyKind::Benchmarks);
    CHECK(to_string(PolicyKind::TBSPlus) == "TBS+");
    CHECK_THROWS_AS(parse_policy_kind("dual-index"), InputError);
    CHECK(parse_sweep_axis("varl-y") == SweepAxis::VarlY);
    CHECK_THROWS_AS(parse_sweep_axis("lead"), InputError);
}

TEST_CASE("default plans") {
    const ExperimentPlan m = default_matrix_plan();
    CHECK(m.countries.size() * m.storages.size() * m.rhos.size() == 15);
    const ExperimentPlan s = default_sweep_plan();
    CHECK(s.rhos.size() == 11);
    CHECK(s.varl_grid.capacity.size() == 11);
    CHECK(s.varl_grid.capacity.back() == doctest::Approx(1.0));
    CHECK(s.storage_costs.size() == 16);
    CHECK(s.storage_costs.front() == 0.5);
    CHECK(s.storage_costs.back() == 8.0);
}

TEST_CASE("plan files") {
    std::istringstream in(
        "[plan]\ncountries = Norway, UAE\nstorages = LH\nrhos = 0.6:1.0:0.2\npolicies = Optimal, FOQ+\n"
        "[sim]\nperiods = 5000\nseed = 9\n[varl]\nyield = 0, 1\n");
    const ExperimentPlan p = read_plan(in);
    CHECK(p.countries == std::vector<Country>{Country::Norway, Country::UAE});
    CHECK(p.storages == std::vector<Storage>{Storage::LiquidHydrogen});
    REQUIRE(p.rhos.size() == 3);
    CHECK(p.rhos[1] == doctest::Approx(0.8));
    CHECK(p.policies == std::vector<PolicyKind>{PolicyKind::Optimal, PolicyKind::FOQPlus});
    CHECK(p.sim.periods == 5000);
    CHECK(p.sim.seed == 9);
    CHECK(p.varl_grid.yield == std::vector<double>{0.0, 1.0});
    CHECK(p.varl_grid.capacity == std::vector<double>{kBaseVarL});

    std::stringstream round;
    write_plan(round, p);
    const ExperimentPlan back = read_plan(round);
    CHECK(back.countries == p.countries);
    CHECK(back.rhos == p.rhos);
    CHECK(back.policies == p.policies);
    CHECK(back.sim.seed == p.sim.seed);
    CHECK(back.varl_grid.yield == p.varl_grid.yield);

    auto bad = [](const std::string& text) {
        std::istringstream s(text);
        return read_plan(s);
    };
    CHECK_THROWS_AS(bad("[plan]\nrhos = -1\n"), ConfigError);
    CHECK_THROWS_AS(bad("[plan]\ncountries =\n"), ConfigError);
    CHECK_THROWS_AS(bad("[varl]\ncapacity = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(bad("[sim]\nperiods = many\n"), ConfigError);
    CHECK_THROWS_AS(bad("[plan]\nignore_mode = maybe\n"), ConfigError);
    CHECK_THROWS_AS(bad("[sim]\nwarmup = 200000\n"), ConfigError);
    CHECK_THROWS(bad("[plan]\ncountries = Atlantis\n"));
    CHECK_THROWS_AS(load_plan("/nonexistent/plan.ini"), IoError);
}

TEST_CASE("single cell with only the optimal policy") {
    ExperimentPlan p = quick_plan();
    p.policies = {PolicyKind::Optimal};
    RunLog log;
    const auto rows = run_benchmark_matrix(p, &log);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].policy == "Optimal");
    REQUIRE(rows[0].gap_pct.has_value());
    CHECK(*rows[0].gap_pct == 0.0);
    CHECK(rows[0].country == "Norway");
    CHECK(rows[0].storage == "SC");
    CHECK(rows[0].runtime_s == 0.0);
    REQUIRE(log.cells.size() == 1);
    CHECK(log.cells[0].config_hash.size() == 16);
    CHECK(log.cells[0].error.empty());
}

TEST_CASE("benchmark matrix rows") {
    ExperimentPlan p = quick_plan();
    p.rhos = {0.8, 1.2};
    const auto rows = run_benchmark_matrix(p);
    REQUIRE(rows.size() == 2 * 6);
    const std::vector<std::string> order{"Optimal", "OnlyLocal", "OnlyImport", "NoNo", "YesNo", "NoYes"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].policy == order[i % 6]);
        CHECK(rows[i].rho == (i < 6 ? 0.8 : 1.2));
        CHECK_FALSE(rows[i].failed());
        // Every model simulates on the same seed, so nothing beats the optimum by much.
        const ResultRow& opt = rows[i - i % 6];
        CHECK(rows[i].avg_cost >= opt.avg_cost - 3.0 * rows[i].ci_halfwidth);
    }
}

TEST_CASE("policy matrix rows and determinism") {
    ExperimentPlan p = quick_plan();
    const auto a = run_policy_matrix(p);
    REQUIRE(a.size() == 5);
    const std::vector<std::string> order{"Optimal", "FOQ", "FOQ+", "TBS", "TBS+"};
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].policy == order[i]);
    CHECK(csv(a) == csv(run_policy_matrix(p)));

    // Worker count does not change the output.
    p.rhos = {0.8, 1.0, 1.2};
    p.policies = {PolicyKind::Optimal, PolicyKind::FOQ};
    setenv("H2DS_WORKERS", "1", 1);
    CHECK(worker_count() == 1);
    const std::string serial = csv(run_policy_matrix(p));
    setenv("H2DS_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    RunLog log;
    const std::string parallel = csv(run_policy_matrix(p, &log));
    CHECK(log.workers == 3);
    CHECK(serial == parallel);
    setenv("H2DS_WORKERS", "zero", 1);
    CHECK(worker_count() >= 1);
    unsetenv("H2DS_WORKERS");
}

TEST_CASE("a failing cell yields an error row") {
    ExperimentPlan p = quick_plan();
    p.policies = {PolicyKind::Optimal, PolicyKind::Benchmarks};
    p.solver.max_iterations = 2;
    RunLog log;
    const auto rows = run_benchmark_matrix(p, &log);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].failed());
    CHECK(rows[0].policy == "error");
    CHECK(std::isnan(rows[0].avg_cost));
    CHECK_FALSE(log.cells[0].error.empty());
    const auto table = lines(csv(rows));
    REQUIRE(table.size() == 2);
    CHECK(table[1] == "Norway,SC,1.00,0.50,0.50,0.50,error,nan,nan,nan,0.00");
}

TEST_CASE("sweeps") {
    ExperimentPlan p = default_sweep_plan();
    p.countries = {Country::Norway};
    p.rhos = {0.8, 1.2};
    p.varl_grid = {{0.0, 1.0}, {0.0, 0.5}, {0.2}};
    p.storage_costs = {1.0, 2.0, 4.0};
    p.sim.periods = 5000;
    p.sim.warmup = 500;
    SUBCASE("rho by capacity VarL") {
        const auto rows = run_sensitivity_sweep(p, SweepAxis::RhoVarlC);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].varl_c == 0.0);
        CHECK(rows[0].varl_d == kBaseVarL);
    }
    SUBCASE("single axis") {
        const auto rows = run_sensitivity_sweep(p, SweepAxis::VarlD);
        REQUIRE(rows.size() == 4);
        for (const auto& r : rows) {
            CHECK(r.varl_c == kBaseVarL);
            CHECK(r.varl_y == kBaseVarL);
        }
    }
    SUBCASE("storage cost") {
        const auto rows = run_sensitivity_sweep(p, SweepAxis::StorageCost);
        REQUIRE(rows.size() == 6);
        CHECK(rows[0].storage == "c_hold=1.00");
        // Dearer storage cannot make the optimum cheaper.
        CHECK(rows[2].avg_cost >= rows[0].avg_cost - 3 * (rows[0].ci_halfwidth + rows[2].ci_halfwidth));
        p.storage_costs.clear();
        CHECK_THROWS_AS(run_sensitivity_sweep(p, SweepAxis::StorageCost), ConfigError);
    }
}

TEST_CASE("table output") {
    ResultRow r;
    r.country = "Morocco";
    r.storage = "SC";
    r.rho = 1.4;
    r.varl_c = r.varl_d = r.varl_y = 0.5;
    r.policy = "FOQ+";
    r.avg_cost = 123.456;
    r.gap_pct = -0.001;
    r.local_share_pct = 37.126;
    const std::vector<ResultRow> rows{r};

    CHECK(table_header() ==
          "country,storage,rho,varl_c,varl_d,varl_y,policy,avg_cost,gap_pct,local_share_pct,runtime_s");
    const auto c = lines(csv(rows));
    REQUIRE(c.size() == 2);
    CHECK(c[0] == table_header());
    CHECK(c[1] == "Morocco,SC,1.40,0.50,0.50,0.50,FOQ+,123.46,0.00,37.13,0.00");

    std::ostringstream md;
    write_table(md, rows, TableFormat::Markdown);
    const auto m = lines(md.str());
    REQUIRE(m.size() == 3);
    CHECK(m[0] == "| country | storage | rho | varl_c | varl_d | varl_y | policy | avg_cost | gap_pct | local_share_pct | "
                  "runtime_s |");
    CHECK(m[1] == "|:---|:---|---:|---:|---:|---:|:---|---:|---:|---:|---:|");
    CHECK(m[2] == "| Morocco | SC | 1.40 | 0.50 | 0.50 | 0.50 | FOQ+ | 123.46 | 0.00 | 37.13 | 0.00 |");

    r.gap_pct.reset();
    CHECK(lines(csv({r}))[1] == "Morocco,SC,1.40,0.50,0.50,0.50,FOQ+,123.46,nan,37.13,0.00");

    CHECK(parse_table_format("md") == TableFormat::Markdown);
    CHECK_THROWS_AS(parse_table_format("xlsx"), InputError);
}

TEST_CASE("emit_table writes files and rejects bad input") {
    ResultRow r;
    r.country = "UAE";
    r.storage = "CG";
    r.rho = 1.0;
    r.policy = "TBS";
    r.gap_pct = 0.0;
    const auto path = scratch("table.csv");
    emit_table({r}, TableFormat::Csv, path.string());
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(lines(text.str()).size() == 2);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(emit_table({}, TableFormat::Csv, path.string()), InputError);
    CHECK_THROWS_AS(emit_table({r}, TableFormat::Csv, "/nonexistent/dir/table.csv"), IoError);
}

TEST_CASE("manifest") {
    CHECK(content_hash("") == "cbf29ce484222325");
    CHECK(content_hash("a") == "af63dc4c8601ec8c");
    CHECK(manifest_path("out.csv") == "out.csv.manifest.json");

    ExperimentPlan p = quick_plan();
    p.policies = {PolicyKind::Optimal};
    RunLog log;
    run_benchmark_matrix(p, &log);
    std::ostringstream os;
    write_manifest(os, {"benchmark", "out.csv", &p, &log, nullptr, {}});
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j.at("command") == "benchmark");
    CHECK(j.at("table") == "out.csv");
    CHECK(j.contains("version"));
    CHECK(j.at("cells").size() == 1);
    std::ostringstream plan_text;
    write_plan(plan_text, p);
    CHECK(j.at("plan_hash") == content_hash(plan_text.str()));

    const ProblemConfig c = preset_config({Country::Morocco, Storage::SaltCavern, 1.0});
    CHECK(config_hash(c) == config_hash(c));
    ProblemConfig other = c;
    other.costs.c_hold += 0.01;
    CHECK(config_hash(c) != config_hash(other));
}
