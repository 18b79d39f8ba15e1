#include "h2ds/heuristics.hpp"

#include "h2ds/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <tuple>

namespace h2ds {

SimOptions tuning_options(long periods, std::uint64_t seed) {
    if (periods < kMinTuningPeriods)
        throw InputError("tuning needs at least " + std::to_string(kMinTuningPeriods) + " simulated periods");
    SimOptions opt;
    opt.periods = periods;
    opt.seed = seed;
    return opt;
}

Policy foq_policy(const FOQParams& params, const StateSpace& space) {
    return Policy{std::vector<Action>(space.size(), Action{params.q_local, params.q_import})};
}

FOQParams tune_foq(const ProblemConfig& config, long periods, std::uint64_t seed) {
    const SimOptions opt = tuning_options(periods, seed);
    const Dynamics dyn(config);
    const Quantity step = config.grid.step;

    FOQParams best;
    auto best_key = std::make_tuple(std::numeric_limits<double>::infinity(), Quantity{0}, Quantity{0});
    for (Quantity l = 0; l <= config.grid.max_order_local; l += step) {
        for (Quantity i = 0; i <= config.grid.max_order_import; i += step) {
            const FOQParams candidate{l, i};
            const double cost = simulate(foq_policy(candidate, dyn.space()), dyn, opt).avg_cost;
            const auto key = std::make_tuple(cost, l + i, i);
            if (key < best_key) {
                best_key = key;
                best = candidate;
            }
        }
    }
    return best;
}

BoxBounds box_around(const FOQParams& center, int width_steps, const QuantityGrid& grid) {
    if (width_steps < 0) throw InputError("box width must be >= 0");
    const Quantity w = width_steps * grid.step;
    return {std::clamp<Quantity>(center.q_local - w, 0, grid.max_order_local),
            std::clamp<Quantity>(center.q_local + w, 0, grid.max_order_local),
            std::clamp<Quantity>(center.q_import - w, 0, grid.max_order_import),
            std::clamp<Quantity>(center.q_import + w, 0, grid.max_order_import)};
}

SolveResult build_foq_plus(const ProblemConfig& config, const FOQParams& center, int width_steps,
                           const SolverOptions& options) {
    const BoxBounds b = box_around(center, width_steps, config.grid);
    return relative_value_iteration(config, restriction::Box{b.local_min, b.local_max, b.import_min, b.import_max},
                                    options);
}

Policy tbs_policy(const TBSParams& params, const StateSpace& space, const QuantityGrid& grid) {
    Policy p;
    p.actions.reserve(space.size());
    for (std::size_t s = 0; s < space.size(); ++s) {
        const Quantity inv = static_cast<Quantity>(space.inventory_units(s)) * space.step();
        p.actions.push_back({threshold_local_request(params.threshold, inv, grid), params.q_import});
    }
    return p;
}

Policy tbs_policy(const TBSParams& params, const ProblemConfig& config) {
    return tbs_policy(params, StateSpace(config), config.grid);
}

TBSParams tune_tbs(const ProblemConfig& config, long periods, std::uint64_t seed) {
    const SimOptions opt = tuning_options(periods, seed);
    const Dynamics dyn(config);
    const Quantity step = config.grid.step;

    TBSParams best;
    auto best_key = std::make_tuple(std::numeric_limits<double>::infinity(), Quantity{0}, Quantity{0});
    for (Quantity threshold = 0; threshold <= config.grid.max_inventory; threshold += step) {
        for (Quantity i = 0; i <= config.grid.max_order_import; i += step) {
            const TBSParams candidate{threshold, i};
            const double cost = simulate(tbs_policy(candidate, dyn.space(), config.grid), dyn, opt).avg_cost;
            const auto key = std::make_tuple(cost, threshold, i);
            if (key < best_key) {
                best_key = key;
                best = candidate;
            }
        }
    }
    return best;
}

SolveResult build_tbs_plus(const ProblemConfig& config, const TBSParams& params, int width_steps,
                           const SolverOptions& options) {
    const BoxBounds b = box_around(FOQParams{0, params.q_import}, width_steps, config.grid);
    return relative_value_iteration(config, restriction::TbsPlus{params.threshold, b.import_min, b.import_max},
                                    options);
}

void write_tuned_params(std::ostream& out, const TunedParams& p) {
    nlohmann::ordered_json j;
    j["label"] = p.label;
    j["foq"] = {{"q_local", p.foq.q_local}, {"q_import", p.foq.q_import}};
    j["tbs"] = {{"threshold", p.tbs.threshold}, {"q_import", p.tbs.q_import}};
    j["periods"] = p.periods;
    j["seed"] = p.seed;
    out << j.dump(2) << '\n';
}

TunedParams read_tuned_params(std::istream& in) {
    try {
        const auto j = nlohmann::json::parse(in);
        TunedParams p;
        p.label = j.value("label", std::string{});
        p.foq = {j.at("foq").at("q_local").get<Quantity>(), j.at("foq").at("q_import").get<Quantity>()};
        p.tbs = {j.at("tbs").at("threshold").get<Quantity>(), j.at("tbs").at("q_import").get<Quantity>()};
        p.periods = j.value("periods", 0L);
        p.seed = j.value("seed", std::uint64_t{0});
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("tuned parameter record: ") + e.what());
    }
}

}  // namespace h2ds
