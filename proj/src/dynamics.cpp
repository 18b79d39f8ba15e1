#include "h2ds/dynamics.hpp"

#include "h2ds/errors.hpp"

#include <algorithm>
#include <tuple>

namespace h2ds {

namespace {

std::size_t checked_power(std::size_t base, int exponent, std::size_t ceiling) {
    std::size_t result = 1;
    for (int i = 0; i < exponent; ++i) {
        if (result > ceiling / base) return ceiling + 1;
        result *= base;
    }
    return result;
}

}  // namespace

// --- StateSpace -------------------------------------------------------------

StateSpace::StateSpace(const ProblemConfig& config, std::size_t max_states)
    : step_(config.grid.step),
      inventory_levels_(config.grid.inventory_levels()),
      local_levels_(config.grid.local_levels()),
      import_levels_(config.grid.import_levels()),
      local_slots_(std::max(config.lead_local - 1, 0)),
      import_slots_(config.lead_import - 1) {
    if (step_ <= 0) throw ConfigError("grid: step must be positive");
    if (import_slots_ < 0) throw ConfigError("leads: lead_import must be >= 1");
    local_count_ = checked_power(static_cast<std::size_t>(local_levels_), local_slots_, max_states);
    import_count_ = checked_power(static_cast<std::size_t>(import_levels_), import_slots_, max_states);
    const double total = static_cast<double>(inventory_levels_) * static_cast<double>(local_count_) *
                         static_cast<double>(import_count_);
    if (total > static_cast<double>(max_states))
        throw CapacityError("state space exceeds " + std::to_string(max_states) +
                            " states; use a coarser grid or shorter lead times");
    size_ = static_cast<std::size_t>(inventory_levels_) * local_count_ * import_count_;
    local_radix_ = local_slots_ > 0 ? local_count_ / static_cast<std::size_t>(local_levels_) : 1;
    import_radix_ = import_slots_ > 0 ? import_count_ / static_cast<std::size_t>(import_levels_) : 1;
}

State StateSpace::state(std::size_t index) const {
    if (index >= size_) throw InputError("state index out of range");
    State s;
    s.inventory = static_cast<Quantity>(inventory_units(index)) * step_;
    const std::size_t pipe = pipeline_of(index);
    std::size_t local = pipe / import_count_;
    std::size_t imp = pipe % import_count_;
    s.local_pipeline.resize(static_cast<std::size_t>(local_slots_));
    for (int i = local_slots_ - 1; i >= 0; --i) {
        s.local_pipeline[static_cast<std::size_t>(i)] =
            static_cast<Quantity>(local % static_cast<std::size_t>(local_levels_)) * step_;
        local /= static_cast<std::size_t>(local_levels_);
    }
    s.import_pipeline.resize(static_cast<std::size_t>(import_slots_));
    for (int i = import_slots_ - 1; i >= 0; --i) {
        s.import_pipeline[static_cast<std::size_t>(i)] =
            static_cast<Quantity>(imp % static_cast<std::size_t>(import_levels_)) * step_;
        imp /= static_cast<std::size_t>(import_levels_);
    }
    return s;
}

std::size_t StateSpace::index(const State& s) const {
    auto units = [&](Quantity q, int levels, const char* what) {
        if (q < 0 || q % step_ != 0 || q / step_ >= levels)
            throw InputError(std::string("state: ") + what + " quantity " + std::to_string(q) + " out of range");
        return static_cast<std::size_t>(q / step_);
    };
    if (s.local_pipeline.size() != static_cast<std::size_t>(local_slots_) ||
        s.import_pipeline.size() != static_cast<std::size_t>(import_slots_))
        throw InputError("state: pipeline lengths do not match the lead times");
    std::size_t local = 0;
    for (Quantity q : s.local_pipeline)
        local = local * static_cast<std::size_t>(local_levels_) + units(q, local_levels_, "local pipeline");
    std::size_t imp = 0;
    for (Quantity q : s.import_pipeline)
        imp = imp * static_cast<std::size_t>(import_levels_) + units(q, import_levels_, "import pipeline");
    return units(s.inventory, inventory_levels_, "inventory") * pipeline_count() + local * import_count_ + imp;
}

StateSpace::Shift StateSpace::shift_import(std::size_t import_idx, int order_units) const {
    if (import_slots_ == 0) return {order_units, 0};
    return {static_cast<int>(import_idx / import_radix_),
            (import_idx % import_radix_) * static_cast<std::size_t>(import_levels_) +
                static_cast<std::size_t>(order_units)};
}

StateSpace::Shift StateSpace::shift_local(std::size_t local_idx, int delivered_units) const {
    if (local_slots_ == 0) return {delivered_units, 0};
    return {static_cast<int>(local_idx / local_radix_),
            (local_idx % local_radix_) * static_cast<std::size_t>(local_levels_) +
                static_cast<std::size_t>(delivered_units)};
}

StateSpace enumerate_states(const ProblemConfig& config, std::size_t max_states) {
    return StateSpace(config, max_states);
}

// --- costs --------------------------------------------------------------------

double order_cost(Quantity delivered_local, Quantity import_order, const CostParams& costs) {
    return (costs.c_local * static_cast<double>(delivered_local) + costs.c_import * static_cast<double>(import_order)) *
           kCostScale;
}

double inventory_cost(Quantity net_after_demand, const CostParams& costs, Quantity storage_cap) {
    if (net_after_demand >= 0)
        return costs.c_hold * static_cast<double>(std::min(net_after_demand, storage_cap)) * kCostScale;
    return costs.c_penalty * static_cast<double>(-net_after_demand) * kCostScale;
}

// --- Dynamics -----------------------------------------------------------------

Dynamics::Dynamics(ProblemConfig config, std::size_t max_states)
    : config_(std::move(config)), space_((validate(config_), config_), max_states) {
    auto to_unit_pmf = [this](const DiscreteDistribution& d) {
        UnitPmf pmf;
        for (std::size_t i = 0; i < d.size(); ++i) {
            pmf.units.push_back(to_units(d.support()[i]));
            pmf.probs.push_back(d.probs()[i]);
        }
        return pmf;
    };
    capacity_ = to_unit_pmf(capacity_pmf(config_));
    demand_ = to_unit_pmf(demand_pmf(config_));
    for (int o = 0; o <= max_import_units(); ++o) {
        UnitPmf pmf = to_unit_pmf(arrival_pmf(static_cast<Quantity>(o) * config_.grid.step, config_));
        std::reverse(pmf.units.begin(), pmf.units.end());
        std::reverse(pmf.probs.begin(), pmf.probs.end());
        arrival_.push_back(std::move(pmf));
    }
}

int Dynamics::to_units(Quantity q) const {
    if (q % config_.grid.step != 0) throw InputError("quantity " + std::to_string(q) + " is off the grid");
    return static_cast<int>(q / config_.grid.step);
}

double Dynamics::cost_units(int delivered_local, int import_units) const {
    const Quantity step = config_.grid.step;
    return order_cost(delivered_local * step, import_units * step, config_.costs);
}

double Dynamics::inventory_cost_units(int net_units) const {
    const Quantity step = config_.grid.step;
    return inventory_cost(net_units * step, config_.costs, config_.grid.max_inventory);
}

int Dynamics::arriving_import_order(std::size_t state, int import_units) const {
    const std::size_t imp = space_.pipeline_of(state) % space_.import_pipeline_count();
    return space_.shift_import(imp, import_units).arriving;
}

Dynamics::Step Dynamics::step(std::size_t state, int local_units, int import_units, int capacity_units,
                              int demand_units, int arrived_units) const {
    const int inv = space_.inventory_units(state);
    const std::size_t pipe = space_.pipeline_of(state);
    const std::size_t import_count = space_.import_pipeline_count();
    const auto imp = space_.shift_import(pipe % import_count, import_units);

    Step out;
    out.delivered_local = std::min(capacity_units, local_units);
    int available = inv;
    int arriving_local = 0;
    std::size_t local_rest = 0;
    if (config_.lead_local == 0) {
        available += out.delivered_local;
    } else {
        const auto loc = space_.shift_local(pipe / import_count, out.delivered_local);
        arriving_local = loc.arriving;
        local_rest = loc.remainder;
    }
    out.arrived_import = arrived_units;
    out.net_after_demand = available - demand_units;
    out.stage_cost = cost_units(out.delivered_local, import_units) + inventory_cost_units(out.net_after_demand);
    const int cap = max_inventory_units();
    const int raw_next = std::max(out.net_after_demand, 0) + arriving_local + arrived_units;
    out.clipped = raw_next > cap;
    out.next_index = space_.compose(std::min(raw_next, cap), local_rest * import_count + imp.remainder);
    return out;
}

std::vector<TransitionEntry> Dynamics::successors(std::size_t state, const Action& action) const {
    if (state >= space_.size()) throw InputError("state index out of range");
    const int local = to_units(action.local_request);
    const int imp = to_units(action.import_order);
    if (local < 0 || local > max_local_units() || imp < 0 || imp > max_import_units())
        throw InputError("action outside the admissible order range");

    const UnitPmf& arrivals = arrival(arriving_import_order(state, imp));
    std::vector<TransitionEntry> rows;
    rows.reserve(capacity_.units.size() * demand_.units.size() * arrivals.units.size());
    for (std::size_t k = 0; k < capacity_.units.size(); ++k) {
        for (std::size_t d = 0; d < demand_.units.size(); ++d) {
            for (std::size_t a = 0; a < arrivals.units.size(); ++a) {
                const Step s = step(state, local, imp, capacity_.units[k], demand_.units[d], arrivals.units[a]);
                rows.push_back({s.next_index, capacity_.probs[k] * demand_.probs[d] * arrivals.probs[a], s.stage_cost});
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const TransitionEntry& x, const TransitionEntry& y) {
        return std::tie(x.next_index, x.stage_cost) < std::tie(y.next_index, y.stage_cost);
    });
    std::vector<TransitionEntry> merged;
    for (const auto& r : rows) {
        if (!merged.empty() && merged.back().next_index == r.next_index && merged.back().stage_cost == r.stage_cost)
            merged.back().prob += r.prob;
        else
            merged.push_back(r);
    }
    return merged;
}

double Dynamics::q_value(std::size_t state, const Action& action, std::span<const double> values) const {
    if (values.size() != space_.size()) throw InputError("value table does not match the state space");
    double q = 0.0;
    for (const auto& e : successors(state, action)) q += e.prob * (e.stage_cost + values[e.next_index]);
    return q;
}

std::vector<TransitionEntry> successor_distribution(const State& state, const Action& action,
                                                    const ProblemConfig& config) {
    const Dynamics dyn(config);
    return dyn.successors(dyn.space().index(state), action);
}

double q_value(const State& state, const Action& action, std::span<const double> values,
               const ProblemConfig& config) {
    const Dynamics dyn(config);
    return dyn.q_value(dyn.space().index(state), action, values);
}

}  // namespace h2ds
