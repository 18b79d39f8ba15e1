#pragma once

#include "h2ds/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace h2ds {

struct SimOptions {
    long periods = 100'000;
    long warmup = 1'000;  // leading periods excluded from every average
    std::uint64_t seed = 1;
    std::size_t initial_state = 0;  // empty system
    int batches = 100;
};

struct SimulationReport {
    double avg_cost = 0.0;
    double ci_halfwidth = 0.0;  // 95% batch-means half-width
    double local_share = 0.0;   // delivered local / (delivered local + arrived import)
    double import_share = 0.0;
    double fill_rate = 1.0;
    double cap_hit_rate = 0.0;
    double avg_inventory = 0.0;  // tonnes, post-arrival stock at decision time
    long counted_periods = 0;

    bool operator==(const SimulationReport&) const = default;
};

/// Uniform draw in (0, 1) for period `t` and random variable `tag`; a pure
/// function of its arguments so every policy sees the same randomness.
double stream_uniform(std::uint64_t seed, std::uint64_t t, std::uint64_t tag);

enum class StreamTag : std::uint64_t { Capacity = 0, Demand = 1, YieldLoss = 2 };

/// Long-run simulation of `policy` under the dynamics of `dyn`.
SimulationReport simulate(const Policy& policy, const Dynamics& dyn, const SimOptions& options = {});
SimulationReport simulate(const Policy& policy, const ProblemConfig& config, const SimOptions& options = {});

/// How a benchmark model "ignores" an uncertainty.
enum class IgnoreMode {
    Mean,   // point mass at the mean
    Ideal,  // capacity always at its upper bound, no import loss
};

struct BenchmarkVariant {
    std::string label;  // OnlyLocal, OnlyImport, NoNo, YesNo, NoYes
    ProblemConfig config;
    ActionRestriction restriction;
};

/// The five benchmark models: two single-sourcing restrictions of the true
/// model and three dual-sourcing models that ignore capacity risk, yield
/// risk, or both (Yes/No reads stochastic supply / random yield).
std::vector<BenchmarkVariant> build_benchmark_variants(const ProblemConfig& config,
                                                       IgnoreMode mode = IgnoreMode::Mean);

/// Percentage cost deviation of a variant from the optimal policy; empty
/// when the optimal cost is zero.
std::optional<double> benchmark_deviation(const SimulationReport& optimal, const SimulationReport& variant);

/// Mean of the yield-loss distribution (truncated normal).
double yield_loss_mean(const DistributionSpec& spec);

std::string simulation_report_header();
/// One delimiter-separated row, columns as in simulation_report_header().
std::string simulation_report_row(const SimulationReport& report);
void write_simulation_report(std::ostream& out, const SimulationReport& report);

}  // namespace h2ds
