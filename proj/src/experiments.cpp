#include "h2ds/experiments.hpp"

#include "h2ds/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef H2DS_VERSION
#define H2DS_VERSION "0.0.0"
#endif

namespace h2ds {

namespace pt = boost::property_tree;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> range(double first, double last, double step) {
    std::vector<double> out;
    const auto n = static_cast<int>(std::floor((last - first) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(std::round((first + i * step) * 1e9) / 1e9);
    return out;
}

// One scenario of a matrix or sweep.
struct Cell {
    ScenarioPreset preset;
    double varl_c = kBaseVarL, varl_d = kBaseVarL, varl_y = kBaseVarL;
    std::optional<double> c_hold;

    ProblemConfig config() const {
        ProblemConfig c = preset_config(preset, varl_c, varl_d, varl_y);
        if (c_hold) c.costs.c_hold = *c_hold;
        c.label = label();
        return c;
    }

    std::string storage_label() const {
        if (!c_hold) return std::string(to_string(preset.storage));
        char buf[64];
        std::snprintf(buf, sizeof buf, "c_hold=%.2f", *c_hold);
        return buf;
    }

    std::string label() const {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s/%s/%.2f/%.2f/%.2f/%.2f", std::string(to_string(preset.country)).c_str(),
                      storage_label().c_str(), preset.rho, varl_c, varl_d, varl_y);
        return buf;
    }

    ResultRow row(std::string policy) const {
        ResultRow r;
        r.country = std::string(to_string(preset.country));
        r.storage = storage_label();
        r.rho = preset.rho;
        r.varl_c = varl_c;
        r.varl_d = varl_d;
        r.varl_y = varl_y;
        r.policy = std::move(policy);
        return r;
    }
};

std::vector<Cell> matrix_cells(const ExperimentPlan& plan) {
    std::vector<Cell> cells;
    for (Country c : plan.countries)
        for (double rho : plan.rhos)
            for (Storage s : plan.storages)
                for (double vc : plan.varl_grid.capacity)
                    for (double vd : plan.varl_grid.demand)
                        for (double vy : plan.varl_grid.yield) cells.push_back({{c, s, rho}, vc, vd, vy, {}});
    return cells;
}

std::vector<Cell> sweep_cells(const ExperimentPlan& plan, SweepAxis axis) {
    std::vector<Cell> cells;
    for (Country c : plan.countries)
        for (Storage s : plan.storages)
            for (double rho : plan.rhos) {
                const Cell base{{c, s, rho}, kBaseVarL, kBaseVarL, kBaseVarL, {}};
                switch (axis) {
                    case SweepAxis::RhoVarlC:
                    case SweepAxis::VarlC:
                        for (double v : plan.varl_grid.capacity) {
                            Cell x = base;
                            x.varl_c = v;
                            cells.push_back(x);
                        }
                        break;
                    case SweepAxis::VarlD:
                        for (double v : plan.varl_grid.demand) {
                            Cell x = base;
                            x.varl_d = v;
                            cells.push_back(x);
                        }
                        break;
                    case SweepAxis::VarlY:
                        for (double v : plan.varl_grid.yield) {
                            Cell x = base;
                            x.varl_y = v;
                            cells.push_back(x);
                        }
                        break;
                    case SweepAxis::StorageCost:
                        for (double h : plan.storage_costs) {
                            Cell x = base;
                            x.c_hold = h;
                            cells.push_back(x);
                        }
                        break;
                }
            }
    // c_hold replaces the storage choice, so one storage is enough.
    if (axis == SweepAxis::StorageCost && plan.storages.size() > 1) {
        std::vector<Cell> unique;
        for (const Cell& x : cells)
            if (x.preset.storage == plan.storages.front()) unique.push_back(x);
        cells = std::move(unique);
    }
    return cells;
}

// Fills a row from a simulation of `policy` under the true dynamics.
void fill(ResultRow& row, const SimulationReport& report, const SimulationReport* optimal) {
    row.avg_cost = report.avg_cost;
    row.ci_halfwidth = report.ci_halfwidth;
    row.local_share_pct = 100.0 * report.local_share;
    row.gap_pct = optimal ? benchmark_deviation(*optimal, report) : std::optional<double>(0.0);
}

using CellJob = std::function<std::vector<ResultRow>(const Cell&, const ProblemConfig&)>;

// Runs every cell on a small worker pool; rows keep cell order.
std::vector<ResultRow> run_cells(const std::vector<Cell>& cells, const CellJob& job, RunLog* log) {
    const auto t0 = Clock::now();
    std::vector<std::vector<ResultRow>> out(cells.size());
    std::vector<CellRecord> records(cells.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto start = Clock::now();
            CellRecord& rec = records[i];
            rec.label = cells[i].label();
            try {
                const ProblemConfig config = cells[i].config();
                rec.config_hash = config_hash(config);
                out[i] = job(cells[i], config);
            } catch (const std::exception& e) {
                ResultRow r = cells[i].row("error");
                r.avg_cost = r.local_share_pct = std::numeric_limits<double>::quiet_NaN();
                r.gap_pct.reset();
                r.error = e.what();
                out[i] = {r};
                rec.error = e.what();
            }
            rec.wall_s = seconds_since(start);
        }
    };

    const int workers = std::max(1, std::min<int>(worker_count(), static_cast<int>(cells.size())));
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }

    std::vector<ResultRow> rows;
    for (auto& v : out) rows.insert(rows.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    if (log) {
        log->cells = std::move(records);
        log->workers = workers;
        log->wall_s = seconds_since(t0);
    }
    return rows;
}

// Times a piece of a cell's work into the row when the plan asks for it.
template <class F>
auto timed(const ExperimentPlan& plan, double& runtime, F&& f) {
    const auto t0 = Clock::now();
    auto result = f();
    if (plan.record_runtime) runtime += seconds_since(t0);
    return result;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::split(parts, text, boost::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& p : split_list(text)) {
        // first:last:step expands to a grid.
        std::vector<std::string> r;
        boost::split(r, p, boost::is_any_of(":"));
        try {
            if (r.size() == 3) {
                const auto g = range(std::stod(r[0]), std::stod(r[1]), std::stod(r[2]));
                out.insert(out.end(), g.begin(), g.end());
            } else if (r.size() == 1) {
                out.push_back(std::stod(p));
            } else {
                throw std::invalid_argument(p);
            }
        } catch (const std::logic_error&) {
            throw ConfigError("plan: bad number list for '" + key + "': " + text);
        }
    }
    return out;
}

// ptree::get with a default swallows conversion failures; this does not.
template <class T>
T value_or(const pt::ptree& tree, const std::string& key, T fallback) {
    return tree.get_child_optional(key) ? tree.get<T>(key) : fallback;
}

template <class T, class Parse>
std::vector<T> parse_names(const std::string& text, Parse parse) {
    std::vector<T> out;
    for (const auto& p : split_list(text)) out.push_back(parse(p));
    return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ',';
        if constexpr (std::is_arithmetic_v<T>)
            os << xs[i];
        else
            os << to_string(xs[i]);
    }
    return os.str();
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    // Avoid "-0.00" so tiny negative gaps print like zero.
    if (std::string_view(buf) == "-0.00") return "0.00";
    return buf;
}

std::vector<std::string> row_fields(const ResultRow& r) {
    return {r.country,
            r.storage,
            format_number(r.rho),
            format_number(r.varl_c),
            format_number(r.varl_d),
            format_number(r.varl_y),
            r.policy,
            format_number(r.avg_cost),
            r.gap_pct ? format_number(*r.gap_pct) : "nan",
            format_number(r.local_share_pct),
            format_number(r.runtime_s)};
}

}  // namespace

std::string_view to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::Optimal: return "Optimal";
        case PolicyKind::FOQ: return "FOQ";
        case PolicyKind::FOQPlus: return "FOQ+";
        case PolicyKind::TBS: return "TBS";
        case PolicyKind::TBSPlus: return "TBS+";
        case PolicyKind::Benchmarks: return "benchmarks";
    }
    return "?";
}

PolicyKind parse_policy_kind(std::string_view text) {
    const std::string t = boost::to_lower_copy(std::string(text));
    if (t == "optimal") return PolicyKind::Optimal;
    if (t == "foq") return PolicyKind::FOQ;
    if (t == "foq+") return PolicyKind::FOQPlus;
    if (t == "tbs") return PolicyKind::TBS;
    if (t == "tbs+") return PolicyKind::TBSPlus;
    if (t == "benchmarks") return PolicyKind::Benchmarks;
    throw InputError("unknown policy '" + std::string(text) + "'");
}

bool ExperimentPlan::wants(PolicyKind p) const {
    return std::find(policies.begin(), policies.end(), p) != policies.end();
}

ExperimentPlan default_matrix_plan() { return {}; }

ExperimentPlan default_sweep_plan() {
    ExperimentPlan p;
    p.storages = {Storage::SaltCavern};
    p.rhos = range(0.5, 1.5, 0.1);
    const auto varl = range(0.0, 1.0, 0.1);
    p.varl_grid = {varl, varl, varl};
    p.policies = {PolicyKind::Optimal};
    p.storage_costs = range(0.5, 8.0, 0.5);
    return p;
}

void validate_plan(const ExperimentPlan& plan) {
    if (plan.countries.empty() || plan.storages.empty() || plan.rhos.empty() || plan.policies.empty())
        throw ConfigError("plan: countries, storages, rhos and policies must be non-empty");
    for (double rho : plan.rhos)
        if (!(rho > 0.0)) throw ConfigError("plan: rho must be positive");
    for (const auto* list : {&plan.varl_grid.capacity, &plan.varl_grid.demand, &plan.varl_grid.yield}) {
        if (list->empty()) throw ConfigError("plan: VarL lists must be non-empty");
        for (double v : *list)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("plan: VarL must lie in [0, 1]");
    }
    for (double h : plan.storage_costs)
        if (!(h >= 0.0)) throw ConfigError("plan: storage costs must be non-negative");
    if (plan.sim.warmup < 0 || plan.sim.warmup >= plan.sim.periods)
        throw ConfigError("plan: require 0 <= warmup < periods");
    if (plan.tuning_periods < kMinTuningPeriods)
        throw ConfigError("plan: tuning periods must be at least " + std::to_string(kMinTuningPeriods));
    if (plan.width_steps < 0) throw ConfigError("plan: width must be >= 0");
    if (!(plan.solver.epsilon > 0.0)) throw ConfigError("plan: epsilon must be positive");
}

ExperimentPlan read_plan(std::istream& in, ExperimentPlan p) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
        if (auto v = tree.get_optional<std::string>("plan.countries"))
            p.countries = parse_names<Country>(*v, parse_country);
        if (auto v = tree.get_optional<std::string>("plan.storages"))
            p.storages = parse_names<Storage>(*v, parse_storage);
        if (auto v = tree.get_optional<std::string>("plan.rhos")) p.rhos = parse_doubles("rhos", *v);
        if (auto v = tree.get_optional<std::string>("plan.policies"))
            p.policies = parse_names<PolicyKind>(*v, parse_policy_kind);
        if (auto v = tree.get_optional<std::string>("plan.storage_costs"))
            p.storage_costs = parse_doubles("storage_costs", *v);
        if (auto v = tree.get_optional<std::string>("plan.ignore_mode")) {
            const auto m = boost::to_lower_copy(*v);
            if (m == "mean")
                p.ignore_mode = IgnoreMode::Mean;
            else if (m == "ideal")
                p.ignore_mode = IgnoreMode::Ideal;
            else
                throw ConfigError("plan: ignore_mode must be mean or ideal");
        }
        p.width_steps = value_or(tree, "plan.width_steps", p.width_steps);
        p.record_runtime = value_or(tree, "plan.record_runtime", p.record_runtime);
        p.out_path = value_or(tree, "plan.out", p.out_path);

        if (auto v = tree.get_optional<std::string>("varl.capacity")) p.varl_grid.capacity = parse_doubles("capacity", *v);
        if (auto v = tree.get_optional<std::string>("varl.demand")) p.varl_grid.demand = parse_doubles("demand", *v);
        if (auto v = tree.get_optional<std::string>("varl.yield")) p.varl_grid.yield = parse_doubles("yield", *v);

        p.sim.periods = value_or(tree, "sim.periods", p.sim.periods);
        p.sim.warmup = value_or(tree, "sim.warmup", p.sim.warmup);
        p.sim.seed = value_or(tree, "sim.seed", p.sim.seed);
        p.sim.batches = value_or(tree, "sim.batches", p.sim.batches);

        p.tuning_periods = value_or(tree, "tuning.periods", p.tuning_periods);
        p.tuning_seed = value_or(tree, "tuning.seed", p.tuning_seed);

        p.solver.epsilon = value_or(tree, "solver.epsilon", p.solver.epsilon);
        p.solver.max_iterations = value_or(tree, "solver.max_iterations", p.solver.max_iterations);
    } catch (const pt::ptree_error& e) {
        throw ConfigError(std::string("plan file: ") + e.what());
    }
    validate_plan(p);
    return p;
}

ExperimentPlan load_plan(const std::string& path, ExperimentPlan base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plan file " + path);
    return read_plan(in, std::move(base));
}

void write_plan(std::ostream& out, const ExperimentPlan& p) {
    out << "[plan]\n"
        << "countries = " << join(p.countries) << '\n'
        << "storages = " << join(p.storages) << '\n'
        << "rhos = " << join(p.rhos) << '\n'
        << "policies = " << join(p.policies) << '\n'
        << "storage_costs = " << join(p.storage_costs) << '\n'
        << "ignore_mode = " << (p.ignore_mode == IgnoreMode::Mean ? "mean" : "ideal") << '\n'
        << "width_steps = " << p.width_steps << '\n'
        << "record_runtime = " << (p.record_runtime ? "true" : "false") << "\n\n"
        << "[varl]\n"
        << "capacity = " << join(p.varl_grid.capacity) << '\n'
        << "demand = " << join(p.varl_grid.demand) << '\n'
        << "yield = " << join(p.varl_grid.yield) << "\n\n"
        << "[sim]\n"
        << "periods = " << p.sim.periods << '\n'
        << "warmup = " << p.sim.warmup << '\n'
        << "seed = " << p.sim.seed << '\n'
        << "batches = " << p.sim.batches << "\n\n"
        << "[tuning]\n"
        << "periods = " << p.tuning_periods << '\n'
        << "seed = " << p.tuning_seed << "\n\n"
        << "[solver]\n"
        << "epsilon = " << p.solver.epsilon << '\n'
        << "max_iterations = " << p.solver.max_iterations << '\n';
}

std::vector<ResultRow> run_benchmark_matrix(const ExperimentPlan& plan, RunLog* log) {
    validate_plan(plan);
    auto job = [&](const Cell& cell, const ProblemConfig& config) {
        std::vector<ResultRow> rows;
        const Dynamics dyn(config);
        ResultRow opt_row = cell.row("Optimal");
        const SolveResult opt = timed(plan, opt_row.runtime_s,
                                      [&] { return relative_value_iteration(dyn, restriction::Full{}, plan.solver); });
        const SimulationReport base =
            timed(plan, opt_row.runtime_s, [&] { return simulate(opt.policy, dyn, plan.sim); });
        fill(opt_row, base, nullptr);
        if (plan.wants(PolicyKind::Optimal)) rows.push_back(opt_row);
        if (!plan.wants(PolicyKind::Benchmarks)) return rows;

        for (const BenchmarkVariant& v : build_benchmark_variants(config, plan.ignore_mode)) {
            ResultRow row = cell.row(v.label);
            const SolveResult r = timed(plan, row.runtime_s, [&] {
                return relative_value_iteration(Dynamics(v.config), v.restriction, plan.solver);
            });
            fill(row, timed(plan, row.runtime_s, [&] { return simulate(r.policy, dyn, plan.sim); }), &base);
            rows.push_back(row);
        }
        return rows;
    };
    return run_cells(matrix_cells(plan), job, log);
}

std::vector<ResultRow> run_policy_matrix(const ExperimentPlan& plan, RunLog* log) {
    validate_plan(plan);
    auto job = [&](const Cell& cell, const ProblemConfig& config) {
        std::vector<ResultRow> rows;
        const Dynamics dyn(config);
        ResultRow opt_row = cell.row("Optimal");
        const SolveResult opt = timed(plan, opt_row.runtime_s,
                                      [&] { return relative_value_iteration(dyn, restriction::Full{}, plan.solver); });
        const SimulationReport base =
            timed(plan, opt_row.runtime_s, [&] { return simulate(opt.policy, dyn, plan.sim); });
        fill(opt_row, base, nullptr);
        if (plan.wants(PolicyKind::Optimal)) rows.push_back(opt_row);

        auto emit = [&](PolicyKind kind, double tune_time, auto&& make_policy) {
            ResultRow row = cell.row(std::string(to_string(kind)));
            row.runtime_s = tune_time;
            const Policy policy = timed(plan, row.runtime_s, make_policy);
            fill(row, timed(plan, row.runtime_s, [&] { return simulate(policy, dyn, plan.sim); }), &base);
            rows.push_back(row);
        };

        if (plan.wants(PolicyKind::FOQ) || plan.wants(PolicyKind::FOQPlus)) {
            double t = 0.0;
            const FOQParams foq =
                timed(plan, t, [&] { return tune_foq(config, plan.tuning_periods, plan.tuning_seed); });
            if (plan.wants(PolicyKind::FOQ)) emit(PolicyKind::FOQ, t, [&] { return foq_policy(foq, dyn.space()); });
            if (plan.wants(PolicyKind::FOQPlus))
                emit(PolicyKind::FOQPlus, t,
                     [&] { return build_foq_plus(config, foq, plan.width_steps, plan.solver).policy; });
        }
        if (plan.wants(PolicyKind::TBS) || plan.wants(PolicyKind::TBSPlus)) {
            double t = 0.0;
            const TBSParams tbs =
                timed(plan, t, [&] { return tune_tbs(config, plan.tuning_periods, plan.tuning_seed); });
            if (plan.wants(PolicyKind::TBS))
                emit(PolicyKind::TBS, t, [&] { return tbs_policy(tbs, dyn.space(), config.grid); });
            if (plan.wants(PolicyKind::TBSPlus))
                emit(PolicyKind::TBSPlus, t,
                     [&] { return build_tbs_plus(config, tbs, plan.width_steps, plan.solver).policy; });
        }
        return rows;
    };
    return run_cells(matrix_cells(plan), job, log);
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::RhoVarlC: return "rho_varl_c";
        case SweepAxis::StorageCost: return "storage_cost";
        case SweepAxis::VarlC: return "varl_c";
        case SweepAxis::VarlD: return "varl_d";
        case SweepAxis::VarlY: return "varl_y";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
    std::string t = boost::to_lower_copy(std::string(text));
    std::replace(t.begin(), t.end(), '-', '_');
    for (SweepAxis a :
         {SweepAxis::RhoVarlC, SweepAxis::StorageCost, SweepAxis::VarlC, SweepAxis::VarlD, SweepAxis::VarlY})
        if (t == to_string(a)) return a;
    throw InputError("unknown sweep axis '" + std::string(text) + "'");
}

std::vector<ResultRow> run_sensitivity_sweep(const ExperimentPlan& plan, SweepAxis axis, RunLog* log) {
    validate_plan(plan);
    if (axis == SweepAxis::StorageCost && plan.storage_costs.empty())
        throw ConfigError("plan: the storage-cost sweep needs storage_costs");
    auto job = [&](const Cell& cell, const ProblemConfig& config) {
        const Dynamics dyn(config);
        ResultRow row = cell.row("Optimal");
        const SolveResult opt = timed(plan, row.runtime_s,
                                      [&] { return relative_value_iteration(dyn, restriction::Full{}, plan.solver); });
        fill(row, timed(plan, row.runtime_s, [&] { return simulate(opt.policy, dyn, plan.sim); }), nullptr);
        return std::vector<ResultRow>{row};
    };
    return run_cells(sweep_cells(plan, axis), job, log);
}

int worker_count() {
    if (const char* env = std::getenv("H2DS_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 1024L));
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

TableFormat parse_table_format(std::string_view text) {
    const std::string t = boost::to_lower_copy(std::string(text));
    if (t == "csv") return TableFormat::Csv;
    if (t == "markdown" || t == "md") return TableFormat::Markdown;
    throw InputError("unknown table format '" + std::string(text) + "'");
}

std::string table_header() {
    return "country,storage,rho,varl_c,varl_d,varl_y,policy,avg_cost,gap_pct,local_share_pct,runtime_s";
}

void write_table(std::ostream& out, const std::vector<ResultRow>& rows, TableFormat format) {
    if (format == TableFormat::Csv) {
        out << table_header() << '\n';
        for (const auto& r : rows) out << boost::join(row_fields(r), ",") << '\n';
        return;
    }
    std::vector<std::string> header;
    const std::string h = table_header();
    boost::split(header, h, boost::is_any_of(","));
    out << "| " << boost::join(header, " | ") << " |\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i < 2 || i == 6 ? ":---|" : "---:|");
    out << '\n';
    for (const auto& r : rows) out << "| " << boost::join(row_fields(r), " | ") << " |\n";
}

void emit_table(const std::vector<ResultRow>& rows, TableFormat format, const std::string& out_path) {
    if (rows.empty()) throw InputError("emit_table: no rows");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write table to " + out_path);
    write_table(out, rows, format);
    if (!out.flush()) throw IoError("write failed for " + out_path);
}

std::string content_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const ProblemConfig& config) {
    std::ostringstream os;
    write_scenario(os, config);
    return content_hash(os.str());
}

std::string manifest_path(const std::string& table_path) { return table_path + ".manifest.json"; }

void write_manifest(std::ostream& out, const ManifestInfo& info) {
    nlohmann::ordered_json j;
    j["tool"] = "h2ds";
    j["version"] = H2DS_VERSION;
    j["command"] = info.command;
    j["table"] = info.table_path;
    if (info.plan) {
        std::ostringstream plan_text;
        write_plan(plan_text, *info.plan);
        j["plan_hash"] = content_hash(plan_text.str());
        j["plan"] = plan_text.str();
        j["sim_seed"] = info.plan->sim.seed;
        j["tuning_seed"] = info.plan->tuning_seed;
    }
    if (info.config) {
        std::ostringstream scenario;
        write_scenario(scenario, *info.config);
        j["config_hash"] = content_hash(scenario.str());
        j["scenario"] = scenario.str();
    }
    if (info.seed) j["seed"] = *info.seed;
    if (info.log) {
        j["workers"] = info.log->workers;
        j["wall_s"] = info.log->wall_s;
        auto cells = nlohmann::ordered_json::array();
        for (const auto& c : info.log->cells) {
            nlohmann::ordered_json cell;
            cell["label"] = c.label;
            cell["config_hash"] = c.config_hash;
            if (info.plan) cell["sim_seed"] = info.plan->sim.seed;
            cell["wall_s"] = c.wall_s;
            if (!c.error.empty()) cell["error"] = c.error;
            cells.push_back(std::move(cell));
        }
        j["cells"] = std::move(cells);
    }
    out << j.dump(2) << '\n';
}

}  // namespace h2ds
