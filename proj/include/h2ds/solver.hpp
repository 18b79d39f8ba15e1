#pragma once

#include "h2ds/dynamics.hpp"

#include <iosfwd>
#include <variant>
#include <vector>

namespace h2ds {

struct SolverOptions {
    double epsilon = 1e-4;  // span stopping threshold, cost units
    long max_iterations = 100'000;
    std::size_t reference_state = 0;
    /// Aperiodicity transform weight in (0, 1]; 1 is plain relative value
    /// iteration. Values below 1 mix each sweep with the previous values.
    double damping = 1.0;
};

/// Stationary deterministic policy indexed by state.
struct Policy {
    std::vector<Action> actions;

    std::size_t size() const { return actions.size(); }
    const Action& operator[](std::size_t i) const { return actions[i]; }
    bool operator==(const Policy&) const = default;
};

struct SolveResult {
    Policy policy;
    double gain = 0.0;        // long-run average cost per period
    std::vector<double> bias; // relative values, zero at the reference state
    double span_residual = 0.0;
    long iterations = 0;
};

/// Restrictions of the per-state action set. Quantities are tonnes.
namespace restriction {
struct Full {};
struct Fixed {
    Quantity local = 0, import = 0;
};
struct Box {
    Quantity local_lo = 0, local_hi = 0, import_lo = 0, import_hi = 0;
};
/// Local request forced to max(0, threshold - inventory), import fixed.
struct Tbs {
    Quantity threshold = 0, import = 0;
};
/// Local request forced as in Tbs, import free within [import_lo, import_hi].
struct TbsPlus {
    Quantity threshold = 0, import_lo = 0, import_hi = 0;
};
struct LocalOnly {};
struct ImportOnly {};
}  // namespace restriction

using ActionRestriction =
    std::variant<restriction::Full, restriction::Fixed, restriction::Box, restriction::Tbs, restriction::TbsPlus,
                 restriction::LocalOnly, restriction::ImportOnly>;

/// Admissible actions of one state as a box in grid units.
struct ActionBox {
    int local_lo = 0, local_hi = 0, import_lo = 0, import_hi = 0;
};

/// Throws ConfigError when the restriction is off-grid, inverted or outside
/// the order limits.
void check_restriction(const ActionRestriction& r, const ProblemConfig& config);
ActionBox admissible_box(const ActionRestriction& r, const Dynamics& dyn, std::size_t state);

/// Local request of the threshold rule, capped at the local order limit and
/// rounded up to the grid.
Quantity threshold_local_request(Quantity threshold, Quantity inventory, const QuantityGrid& grid);

/// Relative value iteration for the average-cost criterion. Each sweep is a
/// synchronous Bellman minimisation followed by normalisation at the
/// reference state; iteration stops once the span of the sweep difference
/// drops below epsilon. Ties are broken toward the lowest local request and
/// then the lowest import order.
SolveResult relative_value_iteration(const Dynamics& dyn, const ActionRestriction& restriction,
                                     const SolverOptions& options = {});
SolveResult relative_value_iteration(const ProblemConfig& config, const ActionRestriction& restriction,
                                     const SolverOptions& options = {});

/// Long-run average cost of a fixed policy by relative policy evaluation.
/// Retries once with 0.5 damping when the plain iteration does not settle.
/// A policy with several recurrent classes has no single gain; its gain
/// from the empty state (index 0) is returned instead.
double exact_policy_gain(const Policy& policy, const Dynamics& dyn, double tolerance = 1e-8,
                         long max_iterations = 20'000);
double exact_policy_gain(const Policy& policy, const ProblemConfig& config, double tolerance = 1e-8,
                         long max_iterations = 20'000);

inline constexpr double kBruteForceLimit = 1e6;

/// Minimum average cost over every stationary deterministic policy of the
/// full action set. Only for desk-scale instances.
double brute_force_optimal_gain(const ProblemConfig& config);

/// Expected one-period cost for every state under `policy`.
std::vector<double> expected_stage_costs(const Policy& policy, const Dynamics& dyn);

/// Flat table: index, inventory, pipelines, chosen action, bias.
void write_solution_csv(std::ostream& out, const SolveResult& result, const StateSpace& space);

}  // namespace h2ds
