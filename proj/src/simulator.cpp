#include "h2ds/simulator.hpp"

#include "h2ds/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace h2ds {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct Sampler {
    std::vector<int> units;
    std::vector<double> cumulative;

    explicit Sampler(const Dynamics::UnitPmf& pmf) : units(pmf.units) {
        double c = 0.0;
        for (double p : pmf.probs) cumulative.push_back(c += p);
        cumulative.back() = 1.0;
    }

    int draw(double u) const {
        std::size_t i = 0;
        while (i + 1 < cumulative.size() && u >= cumulative[i]) ++i;
        return units[i];
    }
};

}  // namespace

double stream_uniform(std::uint64_t seed, std::uint64_t t, std::uint64_t tag) {
    const std::uint64_t h = splitmix(splitmix(seed) ^ (t * 4 + tag));
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

SimulationReport simulate(const Policy& policy, const Dynamics& dyn, const SimOptions& options) {
    const auto& space = dyn.space();
    if (policy.size() != space.size())
        throw InputError("simulate: policy covers " + std::to_string(policy.size()) + " states, state space has " +
                         std::to_string(space.size()));
    if (options.warmup < 0 || options.warmup >= options.periods)
        throw InputError("simulate: require 0 <= warmup < periods");
    if (options.batches < 2 || options.periods - options.warmup < options.batches)
        throw InputError("simulate: need at least two batches with one period each");
    if (options.initial_state >= space.size()) throw InputError("simulate: initial state out of range");

    const Sampler capacity(dyn.capacity());
    const Sampler demand(dyn.demand());
    std::vector<Sampler> arrivals;
    for (int o = 0; o <= dyn.max_import_units(); ++o) arrivals.emplace_back(dyn.arrival(o));

    const Quantity step = dyn.config().grid.step;
    std::vector<std::pair<int, int>> actions(policy.size());
    for (std::size_t s = 0; s < policy.size(); ++s) {
        const int l = dyn.to_units(policy[s].local_request);
        const int i = dyn.to_units(policy[s].import_order);
        if (l < 0 || l > dyn.max_local_units() || i < 0 || i > dyn.max_import_units())
            throw InputError("simulate: policy action outside the order limits at state " + std::to_string(s));
        actions[s] = {l, i};
    }

    const long counted = options.periods - options.warmup;
    const long batch_size = counted / options.batches;
    std::vector<double> batch_sums(static_cast<std::size_t>(options.batches), 0.0);

    double total_cost = 0.0, delivered = 0.0, arrived = 0.0, demanded = 0.0, lost = 0.0, inventory = 0.0;
    long clipped = 0;
    std::size_t state = options.initial_state;
    for (long t = 0; t < options.periods; ++t) {
        const auto [local, imp] = actions[state];
        const auto tt = static_cast<std::uint64_t>(t);
        const int k = capacity.draw(stream_uniform(options.seed, tt, static_cast<std::uint64_t>(StreamTag::Capacity)));
        const int d = demand.draw(stream_uniform(options.seed, tt, static_cast<std::uint64_t>(StreamTag::Demand)));
        const int order = dyn.arriving_import_order(state, imp);
        const int a = arrivals[static_cast<std::size_t>(order)].draw(
            stream_uniform(options.seed, tt, static_cast<std::uint64_t>(StreamTag::YieldLoss)));
        const Dynamics::Step out = dyn.step(state, local, imp, k, d, a);

        if (t >= options.warmup) {
            const long i = t - options.warmup;
            total_cost += out.stage_cost;
            if (i < batch_size * options.batches)
                batch_sums[static_cast<std::size_t>(i / batch_size)] += out.stage_cost;
            delivered += out.delivered_local;
            arrived += out.arrived_import;
            demanded += d;
            lost += std::max(-out.net_after_demand, 0);
            inventory += space.inventory_units(state);
            clipped += out.clipped ? 1 : 0;
        }
        state = out.next_index;
    }

    SimulationReport r;
    r.counted_periods = counted;
    r.avg_cost = total_cost / static_cast<double>(counted);
    const double supply = delivered + arrived;
    r.local_share = supply > 0 ? delivered / supply : 0.0;
    r.import_share = supply > 0 ? arrived / supply : 0.0;
    r.fill_rate = demanded > 0 ? 1.0 - lost / demanded : 1.0;
    r.cap_hit_rate = static_cast<double>(clipped) / static_cast<double>(counted);
    r.avg_inventory = inventory / static_cast<double>(counted) * static_cast<double>(step);

    double mean = 0.0;
    for (double& b : batch_sums) mean += (b /= static_cast<double>(batch_size));
    mean /= options.batches;
    double var = 0.0;
    for (double b : batch_sums) var += (b - mean) * (b - mean);
    var /= options.batches - 1;
    const boost::math::students_t t_dist(options.batches - 1);
    r.ci_halfwidth = boost::math::quantile(t_dist, 0.975) * std::sqrt(var / options.batches);
    return r;
}

SimulationReport simulate(const Policy& policy, const ProblemConfig& config, const SimOptions& options) {
    return simulate(policy, Dynamics(config), options);
}

double yield_loss_mean(const DistributionSpec& spec) {
    const double sigma = spec.sigma();
    if (sigma <= 0.0) return spec.mean;
    const double a = (spec.lower - spec.mean) / sigma;
    const double b = (spec.upper - spec.mean) / sigma;
    auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
    const double mass = normal_cdf(b) - normal_cdf(a);
    if (!(mass > 0.0)) return spec.mean;
    return spec.mean + sigma * (pdf(a) - pdf(b)) / mass;
}

std::vector<BenchmarkVariant> build_benchmark_variants(const ProblemConfig& config, IgnoreMode mode) {
    validate(config);
    DistributionSpec fixed_capacity = config.capacity;
    DistributionSpec fixed_loss = config.yield_loss;
    fixed_capacity.varl = 0.0;
    fixed_loss.varl = 0.0;
    if (mode == IgnoreMode::Mean) {
        fixed_capacity.mean = static_cast<double>(round_to_grid(capacity_pmf(config).mean(), config.grid.step));
        fixed_loss.mean = std::round(yield_loss_mean(config.yield_loss) * 1e6) / 1e6;
    } else {
        fixed_capacity.mean = static_cast<double>(capacity_pmf(config).support().back());
        fixed_loss.mean = 0.0;
        fixed_loss.lower = 0.0;
    }
    fixed_capacity.mean = std::clamp(fixed_capacity.mean, fixed_capacity.lower, fixed_capacity.upper);
    fixed_loss.mean = std::clamp(fixed_loss.mean, fixed_loss.lower, fixed_loss.upper);

    auto variant = [&](std::string label, bool ignore_capacity, bool ignore_yield) {
        ProblemConfig c = config;
        if (ignore_capacity) c.capacity = fixed_capacity;
        if (ignore_yield) c.yield_loss = fixed_loss;
        c.label = config.label + ":" + label;
        return BenchmarkVariant{std::move(label), std::move(c), restriction::Full{}};
    };

    std::vector<BenchmarkVariant> out;
    out.push_back({"OnlyLocal", config, restriction::LocalOnly{}});
    out.push_back({"OnlyImport", config, restriction::ImportOnly{}});
    out.push_back(variant("NoNo", true, true));
    out.push_back(variant("YesNo", false, true));
    out.push_back(variant("NoYes", true, false));
    return out;
}

std::optional<double> benchmark_deviation(const SimulationReport& optimal, const SimulationReport& variant) {
    if (optimal.avg_cost == 0.0) return std::nullopt;
    return 100.0 * (variant.avg_cost - optimal.avg_cost) / optimal.avg_cost;
}

std::string simulation_report_header() {
    return "avg_cost,ci_halfwidth,local_share,import_share,fill_rate,cap_hit_rate,avg_inventory,counted_periods";
}

std::string simulation_report_row(const SimulationReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f,%ld", r.avg_cost, r.ci_halfwidth,
                  r.local_share, r.import_share, r.fill_rate, r.cap_hit_rate, r.avg_inventory, r.counted_periods);
    return buf;
}

void write_simulation_report(std::ostream& out, const SimulationReport& report) {
    out << simulation_report_header() << '\n' << simulation_report_row(report) << '\n';
}

}  // namespace h2ds
