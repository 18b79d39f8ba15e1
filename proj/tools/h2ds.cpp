// h2ds: solve, tune, simulate and run experiment matrices for the
// dual-sourcing hydrogen inventory model.

#include "h2ds/errors.hpp"
#include "h2ds/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

using namespace h2ds;

namespace {

struct Args {
    std::vector<std::string> countries;
    std::vector<std::string> storages;
    std::vector<double> rhos;
    std::vector<double> varl_c, varl_d, varl_y;
    std::optional<long> periods;
    std::optional<long> warmup;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::string format = "csv";
    std::string out;
    std::string plan;
    std::string scenario;
    std::string policy = "optimal";
    std::string params;
    std::string axis = "rho_varl_c";
};

void add_shared(CLI::App* cmd, Args& a) {
    cmd->add_option("--country", a.countries, "Norway, Morocco or UAE (comma list for matrices)")->delimiter(',');
    cmd->add_option("--storage", a.storages, "SC, CG or LH (comma list for matrices)")->delimiter(',');
    cmd->add_option("--rho", a.rhos, "local/import unit cost ratio (comma list for matrices)")->delimiter(',');
    cmd->add_option("--varl-c", a.varl_c, "capacity variability level")->delimiter(',');
    cmd->add_option("--varl-d", a.varl_d, "demand variability level")->delimiter(',');
    cmd->add_option("--varl-y", a.varl_y, "yield-loss variability level")->delimiter(',');
    cmd->add_option("--periods", a.periods, "simulated periods (tuning periods for tune)");
    cmd->add_option("--warmup", a.warmup, "periods dropped before averaging");
    cmd->add_option("--seed", a.seed, "random seed shared by every policy");
    cmd->add_option("--epsilon", a.epsilon, "span stopping threshold of the solver");
    cmd->add_option("--format", a.format, "csv or markdown")->capture_default_str();
    cmd->add_option("--out", a.out, "output file (stdout when omitted)");
    cmd->add_option("--plan", a.plan, "experiment plan file");
}

template <class T>
T single(const std::vector<T>& xs, const T& fallback, const char* flag) {
    if (xs.empty()) return fallback;
    if (xs.size() > 1) throw InputError(std::string(flag) + " takes a single value for this command");
    return xs.front();
}

ProblemConfig scenario_config(const Args& a) {
    if (!a.scenario.empty()) return load_scenario(a.scenario);
    ScenarioPreset p;
    p.country = parse_country(single<std::string>(a.countries, "Morocco", "--country"));
    p.storage = parse_storage(single<std::string>(a.storages, "SC", "--storage"));
    p.rho = single(a.rhos, 1.0, "--rho");
    return preset_config(p, single(a.varl_c, kBaseVarL, "--varl-c"), single(a.varl_d, kBaseVarL, "--varl-d"),
                         single(a.varl_y, kBaseVarL, "--varl-y"));
}

SimOptions sim_options(const Args& a) {
    SimOptions o;
    if (a.periods) o.periods = *a.periods;
    if (a.warmup) o.warmup = *a.warmup;
    if (a.seed) o.seed = *a.seed;
    return o;
}

SolverOptions solver_options(const Args& a) {
    SolverOptions o;
    if (a.epsilon) o.epsilon = *a.epsilon;
    return o;
}

ExperimentPlan build_plan(const Args& a, ExperimentPlan base) {
    ExperimentPlan p = a.plan.empty() ? std::move(base) : load_plan(a.plan, std::move(base));
    if (!a.countries.empty()) {
        p.countries.clear();
        for (const auto& c : a.countries) p.countries.push_back(parse_country(c));
    }
    if (!a.storages.empty()) {
        p.storages.clear();
        for (const auto& s : a.storages) p.storages.push_back(parse_storage(s));
    }
    if (!a.rhos.empty()) p.rhos = a.rhos;
    if (!a.varl_c.empty()) p.varl_grid.capacity = a.varl_c;
    if (!a.varl_d.empty()) p.varl_grid.demand = a.varl_d;
    if (!a.varl_y.empty()) p.varl_grid.yield = a.varl_y;
    if (a.periods) p.sim.periods = *a.periods;
    if (a.warmup) p.sim.warmup = *a.warmup;
    if (a.seed) p.sim.seed = p.tuning_seed = *a.seed;
    if (a.epsilon) p.solver.epsilon = *a.epsilon;
    if (!a.out.empty()) p.out_path = a.out;
    validate_plan(p);
    return p;
}

// Writes through `body` to the --out file or stdout.
template <class F>
void write_output(const std::string& path, F&& body) {
    if (path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    body(out);
    if (!out.flush()) throw IoError("write failed for " + path);
}

void write_manifest_file(const ManifestInfo& info) {
    if (info.table_path.empty()) return;
    const std::string path = manifest_path(info.table_path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_manifest(out, info);
}

Policy make_policy(const Args& a, const ProblemConfig& config, const Dynamics& dyn, const SolverOptions& solver) {
    const PolicyKind kind = parse_policy_kind(a.policy);
    if (kind == PolicyKind::Optimal) return relative_value_iteration(dyn, restriction::Full{}, solver).policy;
    if (kind == PolicyKind::Benchmarks) throw InputError("simulate: pick a single policy");

    TunedParams tuned;
    if (!a.params.empty()) {
        std::ifstream in(a.params);
        if (!in) throw IoError("cannot open " + a.params);
        tuned = read_tuned_params(in);
    } else {
        tuned.foq = tune_foq(config);
        tuned.tbs = tune_tbs(config);
    }
    switch (kind) {
        case PolicyKind::FOQ: return foq_policy(tuned.foq, dyn.space());
        case PolicyKind::FOQPlus: return build_foq_plus(config, tuned.foq, kDefaultWidthSteps, solver).policy;
        case PolicyKind::TBS: return tbs_policy(tuned.tbs, dyn.space(), config.grid);
        case PolicyKind::TBSPlus: return build_tbs_plus(config, tuned.tbs, kDefaultWidthSteps, solver).policy;
        default: break;
    }
    throw InputError("unsupported policy");
}

int finish_matrix(const std::string& command, const Args& a, const ExperimentPlan& plan,
                  const std::vector<ResultRow>& rows, const RunLog& log) {
    const TableFormat format = parse_table_format(a.format);
    if (plan.out_path.empty())
        write_table(std::cout, rows, format);
    else
        emit_table(rows, format, plan.out_path);
    write_manifest_file({command, plan.out_path, &plan, &log, nullptr, {}});

    int failures = 0;
    for (const auto& r : rows)
        if (r.failed()) {
            std::cerr << "error: cell " << r.country << '/' << r.storage << '/' << r.rho << ": " << r.error << '\n';
            ++failures;
        }
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-sourcing inventory control with capacity and yield risk"};
    app.require_subcommand(1);
    Args a;

    auto* solve = app.add_subcommand("solve", "optimal policy by relative value iteration");
    auto* tune = app.add_subcommand("tune", "tune FOQ and TBS parameters by simulation");
    auto* sim = app.add_subcommand("simulate", "simulate one policy");
    auto* bench = app.add_subcommand("benchmark", "optimal policy against single-sourcing and misspecified models");
    auto* pol = app.add_subcommand("policies", "optimal policy against FOQ, FOQ+, TBS and TBS+");
    auto* sweep = app.add_subcommand("sweep", "sensitivity of the optimal policy along one axis");
    for (auto* cmd : {solve, tune, sim, bench, pol, sweep}) add_shared(cmd, a);
    for (auto* cmd : {solve, tune, sim}) cmd->add_option("--scenario", a.scenario, "scenario file (overrides presets)");
    sim->add_option("--policy", a.policy, "optimal, FOQ, FOQ+, TBS or TBS+")->capture_default_str();
    sim->add_option("--params", a.params, "tuned parameters from `tune`");
    sweep->add_option("--axis", a.axis, "rho_varl_c, storage_cost, varl_c, varl_d or varl_y")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            const ProblemConfig config = scenario_config(a);
            for (const auto& w : validate(config)) std::cerr << "warning: " << w << '\n';
            const Dynamics dyn(config);
            const SolveResult r = relative_value_iteration(dyn, restriction::Full{}, solver_options(a));
            std::cerr << "gain " << r.gain << " after " << r.iterations << " sweeps (span " << r.span_residual
                      << ")\n";
            write_output(a.out, [&](std::ostream& os) { write_solution_csv(os, r, dyn.space()); });
            write_manifest_file({"solve", a.out, nullptr, nullptr, &config, {}});
            return 0;
        }
        if (tune->parsed()) {
            const ProblemConfig config = scenario_config(a);
            TunedParams t;
            t.label = config.label;
            t.periods = a.periods.value_or(100'000);
            t.seed = a.seed.value_or(1);
            t.foq = tune_foq(config, t.periods, t.seed);
            t.tbs = tune_tbs(config, t.periods, t.seed);
            write_output(a.out, [&](std::ostream& os) { write_tuned_params(os, t); });
            write_manifest_file({"tune", a.out, nullptr, nullptr, &config, t.seed});
            return 0;
        }
        if (sim->parsed()) {
            const ProblemConfig config = scenario_config(a);
            const Dynamics dyn(config);
            const SimOptions opt = sim_options(a);
            const Policy policy = make_policy(a, config, dyn, solver_options(a));
            const SimulationReport report = simulate(policy, dyn, opt);
            write_output(a.out, [&](std::ostream& os) { write_simulation_report(os, report); });
            write_manifest_file({"simulate", a.out, nullptr, nullptr, &config, opt.seed});
            return 0;
        }
        if (bench->parsed() || pol->parsed()) {
            const ExperimentPlan plan = build_plan(a, default_matrix_plan());
            RunLog log;
            const auto rows = bench->parsed() ? run_benchmark_matrix(plan, &log) : run_policy_matrix(plan, &log);
            return finish_matrix(bench->parsed() ? "benchmark" : "policies", a, plan, rows, log);
        }
        if (sweep->parsed()) {
            const ExperimentPlan plan = build_plan(a, default_sweep_plan());
            const SweepAxis axis = parse_sweep_axis(a.axis);
            RunLog log;
            const auto rows = run_sensitivity_sweep(plan, axis, &log);
            return finish_matrix("sweep " + std::string(to_string(axis)), a, plan, rows, log);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
