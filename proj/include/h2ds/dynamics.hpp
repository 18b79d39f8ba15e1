#pragma once

#include "h2ds/model.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace h2ds {

/// Post-arrival system state. Pipelines are ordered oldest-first; the local
/// pipeline holds delivered (capacity-censored) quantities, the import
/// pipeline holds ordered quantities.
struct State {
    Quantity inventory = 0;
    std::vector<Quantity> local_pipeline;
    std::vector<Quantity> import_pipeline;

    bool operator==(const State&) const = default;
};

struct Action {
    Quantity local_request = 0;
    Quantity import_order = 0;

    bool operator==(const Action&) const = default;
};

struct TransitionEntry {
    std::size_t next_index = 0;
    double prob = 0.0;
    double stage_cost = 0.0;
};

inline constexpr std::size_t kDefaultStateCeiling = 5'000'000;

/// Dense lexicographic indexing of (inventory, local pipeline, import
/// pipeline). Inventory is the most significant digit, pipelines follow
/// oldest-first, so index = inventory_level * pipeline_count + pipeline.
class StateSpace {
public:
    explicit StateSpace(const ProblemConfig& config, std::size_t max_states = kDefaultStateCeiling);

    std::size_t size() const { return size_; }
    State state(std::size_t index) const;
    /// Throws InputError for quantities off the grid or out of range.
    std::size_t index(const State& state) const;

    Quantity step() const { return step_; }
    int inventory_levels() const { return inventory_levels_; }
    int local_levels() const { return local_levels_; }
    int import_levels() const { return import_levels_; }
    int local_slots() const { return local_slots_; }
    int import_slots() const { return import_slots_; }

    /// Number of distinct (local pipeline, import pipeline) combinations.
    std::size_t pipeline_count() const { return local_count_ * import_count_; }
    std::size_t import_pipeline_count() const { return import_count_; }

    int inventory_units(std::size_t index) const { return static_cast<int>(index / pipeline_count()); }
    std::size_t pipeline_of(std::size_t index) const { return index % pipeline_count(); }
    std::size_t compose(int inventory_units, std::size_t pipeline) const {
        return static_cast<std::size_t>(inventory_units) * pipeline_count() + pipeline;
    }

    struct Shift {
        int arriving = 0;           // grid units arriving at the start of next period
        std::size_t remainder = 0;  // pipeline sub-index after the shift
    };

    /// Appends `order_units` to the import pipeline `import_idx` and pops
    /// the oldest entry.
    Shift shift_import(std::size_t import_idx, int order_units) const;
    /// Same for the local pipeline; only meaningful when lead_local >= 1.
    Shift shift_local(std::size_t local_idx, int delivered_units) const;

private:
    Quantity step_;
    int inventory_levels_, local_levels_, import_levels_;
    int local_slots_, import_slots_;
    std::size_t local_count_ = 1, import_count_ = 1;
    std::size_t local_radix_ = 1, import_radix_ = 1;  // weight of the oldest slot
    std::size_t size_ = 0;
};

StateSpace enumerate_states(const ProblemConfig& config, std::size_t max_states = kDefaultStateCeiling);

/// Ordering cost in cost units; the local term is charged on the delivered
/// quantity, the import term on the ordered quantity.
double order_cost(Quantity delivered_local, Quantity import_order, const CostParams& costs);

/// Holding on the positive part (clipped at `storage_cap`), lost-sales
/// penalty on the negative part, in cost units.
double inventory_cost(Quantity net_after_demand, const CostParams& costs,
                      Quantity storage_cap = std::numeric_limits<Quantity>::max());

/// Grid-unit view of a problem: cached pmfs plus the one-period transition
/// logic shared by the solver, the simulator and the test oracles.
class Dynamics {
public:
    explicit Dynamics(ProblemConfig config, std::size_t max_states = kDefaultStateCeiling);

    struct UnitPmf {
        std::vector<int> units;
        std::vector<double> probs;
    };

    const ProblemConfig& config() const { return config_; }
    const StateSpace& space() const { return space_; }
    const UnitPmf& capacity() const { return capacity_; }
    const UnitPmf& demand() const { return demand_; }
    /// Arrival distribution of an import order of `order_units` grid units,
    /// listed in increasing order of loss (largest arrival first).
    const UnitPmf& arrival(int order_units) const { return arrival_[static_cast<std::size_t>(order_units)]; }

    int max_local_units() const { return space_.local_levels() - 1; }
    int max_import_units() const { return space_.import_levels() - 1; }
    int max_inventory_units() const { return space_.inventory_levels() - 1; }

    /// Realised one-period outcome for given random draws (grid units).
    struct Step {
        std::size_t next_index = 0;
        int delivered_local = 0;
        int arrived_import = 0;
        int net_after_demand = 0;  // may be negative
        bool clipped = false;
        double stage_cost = 0.0;
    };

    /// `arrived` is the realised arrival (grid units) of the import order
    /// that reaches the site at the start of the next period.
    Step step(std::size_t state, int local_units, int import_units, int capacity_units, int demand_units,
              int arrived_units) const;

    /// Oldest import order in the pipeline after placing `import_units`.
    int arriving_import_order(std::size_t state, int import_units) const;

    std::vector<TransitionEntry> successors(std::size_t state, const Action& action) const;
    double q_value(std::size_t state, const Action& action, std::span<const double> values) const;

    double cost_units(int delivered_local, int import_units) const;
    double inventory_cost_units(int net_units) const;

    int to_units(Quantity q) const;

private:
    ProblemConfig config_;
    StateSpace space_;
    UnitPmf capacity_, demand_;
    std::vector<UnitPmf> arrival_;
};

std::vector<TransitionEntry> successor_distribution(const State& state, const Action& action,
                                                    const ProblemConfig& config);

double q_value(const State& state, const Action& action, std::span<const double> values,
               const ProblemConfig& config);

}  // namespace h2ds
