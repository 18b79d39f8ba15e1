#pragma once

#include "h2ds/heuristics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace h2ds {

enum class PolicyKind { Optimal, FOQ, FOQPlus, TBS, TBSPlus, Benchmarks };

std::string_view to_string(PolicyKind p);
/// Accepts Optimal, FOQ, FOQ+, TBS, TBS+ and benchmarks (case-insensitive).
PolicyKind parse_policy_kind(std::string_view text);

struct VarlGrid {
    std::vector<double> capacity{kBaseVarL};
    std::vector<double> demand{kBaseVarL};
    std::vector<double> yield{kBaseVarL};
};

struct ExperimentPlan {
    std::vector<Country> countries{Country::Morocco};
    std::vector<Storage> storages{Storage::SaltCavern, Storage::CompressedGas, Storage::LiquidHydrogen};
    std::vector<double> rhos{0.6, 0.8, 1.0, 1.2, 1.4};
    /// Matrices run the cross product of the three lists; a sweep walks the
    /// list of its axis and keeps the other two at the base level.
    VarlGrid varl_grid;
    std::vector<PolicyKind> policies{PolicyKind::Optimal, PolicyKind::FOQ,     PolicyKind::FOQPlus,
                                     PolicyKind::TBS,     PolicyKind::TBSPlus, PolicyKind::Benchmarks};
    SimOptions sim;
    SolverOptions solver;
    long tuning_periods = 100'000;
    std::uint64_t tuning_seed = 1;
    int width_steps = kDefaultWidthSteps;
    IgnoreMode ignore_mode = IgnoreMode::Mean;
    /// c_hold values for the storage-cost sweep.
    std::vector<double> storage_costs;
    /// Wall-clock seconds in the runtime_s column. Off by default so tables
    /// stay byte-identical across runs; the manifest always has timings.
    bool record_runtime = false;
    std::string out_path;

    bool wants(PolicyKind p) const;
};

/// Matrix defaults: Morocco, all storages, rho 0.6..1.4, VarL 0.5.
ExperimentPlan default_matrix_plan();
/// Sweep defaults: Morocco/SC, rho 0.5..1.5 step 0.1, VarL 0..1 step 0.1,
/// c_hold 0.5..8 step 0.5.
ExperimentPlan default_sweep_plan();

/// Throws ConfigError on empty selections, non-positive rho, VarL outside
/// [0, 1] or unusable simulation settings.
void validate_plan(const ExperimentPlan& plan);

/// INI plan file. Keys left out keep the value from `base`.
ExperimentPlan read_plan(std::istream& in, ExperimentPlan base = default_matrix_plan());
ExperimentPlan load_plan(const std::string& path, ExperimentPlan base = default_matrix_plan());
void write_plan(std::ostream& out, const ExperimentPlan& plan);

struct ResultRow {
    std::string country;
    std::string storage;
    double rho = 0.0;
    double varl_c = 0.0, varl_d = 0.0, varl_y = 0.0;
    std::string policy;
    double avg_cost = 0.0;
    std::optional<double> gap_pct;  // empty when the optimal cost is zero
    double local_share_pct = 0.0;
    double runtime_s = 0.0;
    double ci_halfwidth = 0.0;  // of avg_cost, not part of the table
    std::string error;          // set on the single row of a failed cell

    bool failed() const { return !error.empty(); }
};

/// Per-cell bookkeeping for the run manifest.
struct CellRecord {
    std::string label;
    std::string config_hash;
    double wall_s = 0.0;
    std::string error;
};

struct RunLog {
    std::vector<CellRecord> cells;
    int workers = 1;
    double wall_s = 0.0;
};

/// Optimal policy plus the five benchmark models per scenario cell, all
/// simulated under the true dynamics on one seed.
std::vector<ResultRow> run_benchmark_matrix(const ExperimentPlan& plan, RunLog* log = nullptr);

/// Optimal, FOQ, FOQ+, TBS and TBS+ per scenario cell.
std::vector<ResultRow> run_policy_matrix(const ExperimentPlan& plan, RunLog* log = nullptr);

enum class SweepAxis { RhoVarlC, StorageCost, VarlC, VarlD, VarlY };

std::string_view to_string(SweepAxis axis);
/// rho_varl_c, storage_cost, varl_c, varl_d or varl_y.
SweepAxis parse_sweep_axis(std::string_view text);

/// Optimal policy cost and local share along one axis. The rho_varl_c
/// axis crosses plan.rhos with the capacity VarL list; the others run at
/// every plan rho. In the storage-cost sweep the storage column reads
/// "c_hold=<value>".
std::vector<ResultRow> run_sensitivity_sweep(const ExperimentPlan& plan, SweepAxis axis, RunLog* log = nullptr);

/// Worker threads for scenario cells: H2DS_WORKERS when set to a positive
/// integer, otherwise the hardware concurrency.
int worker_count();

enum class TableFormat { Csv, Markdown };

TableFormat parse_table_format(std::string_view text);
std::string table_header();
void write_table(std::ostream& out, const std::vector<ResultRow>& rows, TableFormat format);
/// Throws InputError on empty rows, IoError when the file cannot be written.
void emit_table(const std::vector<ResultRow>& rows, TableFormat format, const std::string& out_path);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string content_hash(std::string_view text);
/// Hash of the scenario file form of a configuration.
std::string config_hash(const ProblemConfig& config);

struct ManifestInfo {
    std::string command;
    std::string table_path;
    const ExperimentPlan* plan = nullptr;
    const RunLog* log = nullptr;
    const ProblemConfig* config = nullptr;  // single-scenario commands
    std::optional<std::uint64_t> seed;
};

void write_manifest(std::ostream& out, const ManifestInfo& info);
/// `<table path>.manifest.json`
std::string manifest_path(const std::string& table_path);

}  // namespace h2ds
