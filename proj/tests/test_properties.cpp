// Structural properties that hold on every instance, checked on presets
// and on randomly perturbed configurations.
#include "oracles.hpp"

#include "h2ds/heuristics.hpp"

#include <doctest.h>

#include <random>

using namespace h2ds;

namespace {

ProblemConfig scaled(ProblemConfig c, double lambda) {
    c.costs.c_local *= lambda;
    c.costs.c_import *= lambda;
    c.costs.c_hold *= lambda;
    c.costs.c_penalty *= lambda;
    return c;
}

std::vector<ProblemConfig> sample_configs() {
    std::vector<ProblemConfig> out;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> varl(0.0, 1.0);
    std::uniform_real_distribution<double> rho(0.5, 1.5);
    for (Country country : {Country::Norway, Country::Morocco})
        for (Storage storage : {Storage::SaltCavern, Storage::CompressedGas, Storage::LiquidHydrogen})
            out.push_back(preset_config({country, storage, rho(rng)}, varl(rng), varl(rng), varl(rng)));
    return out;
}

}  // namespace

TEST_CASE("distributions are normalised and on the grid") {
    for (const ProblemConfig& c : sample_configs()) {
        for (const auto& d : {capacity_pmf(c), demand_pmf(c)}) {
            double total = 0.0;
            for (std::size_t k = 0; k < d.size(); ++k) {
                total += d.probs()[k];
                CHECK(d.support()[k] % c.grid.step == 0);
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
        for (Quantity order = 0; order <= c.grid.max_order_import; order += c.grid.step) {
            const auto a = arrival_pmf(order, c);
            CHECK(a.support().back() <= order);
            CHECK(a.support().front() >= round_to_grid(0.65 * static_cast<double>(order), c.grid.step));
            double total = 0.0;
            for (double p : a.probs()) total += p;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("Bellman residual at the returned policy") {
    for (const ProblemConfig& c : sample_configs()) {
        const Dynamics dyn(c);
        const SolveResult r = relative_value_iteration(dyn, restriction::Full{});
        for (std::size_t s = 0; s < dyn.space().size(); s += 3) {
            const double q = dyn.q_value(s, r.policy[s], r.bias);
            CHECK(std::abs(q - r.bias[s] - r.gain) <= r.span_residual + 1e-9);
        }
    }
}

TEST_CASE("gain does not depend on the reference state") {
    for (const ProblemConfig& c : sample_configs()) {
        const Dynamics dyn(c);
        const double eps = SolverOptions{}.epsilon;
        const double g0 = relative_value_iteration(dyn, restriction::Full{}).gain;
        for (std::size_t ref : {dyn.space().size() / 2, dyn.space().size() - 1}) {
            const double g = relative_value_iteration(dyn, restriction::Full{}, {.reference_state = ref}).gain;
            CHECK(std::abs(g - g0) <= 2 * eps);
        }
    }
}

TEST_CASE("restricting the action set never lowers the gain") {
    const double eps = SolverOptions{}.epsilon;
    for (const ProblemConfig& c : sample_configs()) {
        const Dynamics dyn(c);
        const double full = relative_value_iteration(dyn, restriction::Full{}).gain;
        const std::vector<ActionRestriction> restrictions{
            restriction::LocalOnly{},
            restriction::ImportOnly{},
            restriction::Box{4000, 12000, 2000, 10000},
            restriction::Fixed{8000, 6000},
            restriction::Tbs{12000, 4000},
            restriction::TbsPlus{12000, 0, 8000},
        };
        for (const auto& r : restrictions) CHECK(full <= relative_value_iteration(dyn, r).gain + 2 * eps);
        // Nested restrictions keep the order too.
        const double tbs = relative_value_iteration(dyn, restriction::Tbs{12000, 4000}).gain;
        const double tbs_plus = relative_value_iteration(dyn, restriction::TbsPlus{12000, 0, 8000}).gain;
        CHECK(tbs_plus <= tbs + 2 * eps);
    }
}

TEST_CASE("scaling all costs scales the gain and keeps the policy") {
    for (const ProblemConfig& c : sample_configs())
        for (double lambda : {10.0, 0.25}) {
            const SolveResult base = relative_value_iteration(c, restriction::Full{});
            const SolverOptions opt{.epsilon = SolverOptions{}.epsilon * lambda};
            const SolveResult s = relative_value_iteration(scaled(c, lambda), restriction::Full{}, opt);
            CHECK(s.gain == doctest::Approx(lambda * base.gain).epsilon(1e-9));
            CHECK(s.policy == base.policy);
        }
}

TEST_CASE("simulated cost of the optimal policy matches its gain") {
    for (Storage storage : {Storage::SaltCavern, Storage::LiquidHydrogen}) {
        const ProblemConfig c = preset_config({Country::Norway, storage, 1.0});
        const Dynamics dyn(c);
        const SolveResult r = relative_value_iteration(dyn, restriction::Full{});
        const SimulationReport rep = simulate(r.policy, dyn);
        CHECK(std::abs(rep.avg_cost - r.gain) <= std::max(0.01 * r.gain, 3 * rep.ci_halfwidth));
        CHECK(rep.cap_hit_rate < 1e-3);
    }
}

TEST_CASE("batch-means intervals cover the gain across seeds") {
    const ProblemConfig c = preset_config({Country::Norway, Storage::CompressedGas, 1.0});
    const Dynamics dyn(c);
    const SolveResult r = relative_value_iteration(dyn, restriction::Full{}, {.epsilon = 1e-9});
    int covered = 0;
    const int trials = 40;
    for (int seed = 1; seed <= trials; ++seed) {
        SimOptions o;
        o.periods = 20'000;
        o.seed = static_cast<std::uint64_t>(seed);
        const SimulationReport rep = simulate(r.policy, dyn, o);
        if (std::abs(rep.avg_cost - r.gain) < 3 * rep.ci_halfwidth) ++covered;
    }
    CHECK(covered >= 38);
}

TEST_CASE("misspecified models never beat the optimum under the true dynamics") {
    const ProblemConfig c = preset_config({Country::Norway, Storage::SaltCavern, 1.2});
    const Dynamics dyn(c);
    const SimulationReport opt = simulate(relative_value_iteration(dyn, restriction::Full{}).policy, dyn);
    for (const auto& v : build_benchmark_variants(c)) {
        const Policy p = relative_value_iteration(Dynamics(v.config), v.restriction).policy;
        const SimulationReport rep = simulate(p, dyn);
        CHECK(rep.avg_cost >= opt.avg_cost - 3 * rep.ci_halfwidth);
    }
}
