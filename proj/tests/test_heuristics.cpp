#include "h2ds/errors.hpp"
#include "h2ds/heuristics.hpp"

#include <doctest.h>

#include <sstream>

using namespace h2ds;

namespace {

constexpr long kPeriods = 10'000;

ProblemConfig deterministic(double rho) {
    ProblemConfig c = preset_config({Country::Morocco, Storage::SaltCavern, rho}, 0.0, 0.0, 0.0);
    c.capacity.mean = 20000;
    c.yield_loss.mean = 0.0;
    return c;
}

ProblemConfig no_demand() {
    ProblemConfig c = preset_config({Country::Norway, Storage::SaltCavern, 1.0});
    c.demand = {0, 0, 0, 0.0, DistributionKind::Demand};
    return c;
}

}  // namespace

TEST_CASE("FOQ tuning on deterministic instances") {
    SUBCASE("cheap local supply") {
        CHECK(tune_foq(deterministic(0.6), kPeriods) == FOQParams{14000, 0});
    }
    SUBCASE("prohibitive local supply picks the best import-only pair") {
        ProblemConfig c = deterministic(10.0);
        c.lead_import = 1;
        const FOQParams tuned = tune_foq(c, kPeriods);
        CHECK(tuned.q_local == 0);
        // Exact evaluation of every import-only constant policy.
        const Dynamics dyn(c);
        Quantity best = 0;
        double best_gain = std::numeric_limits<double>::infinity();
        for (Quantity i = 0; i <= c.grid.max_order_import; i += c.grid.step) {
            const double g = exact_policy_gain(foq_policy({0, i}, dyn.space()), dyn);
            if (g < best_gain - 1e-9) {
                best_gain = g;
                best = i;
            }
        }
        CHECK(tuned.q_import == best);
    }
    SUBCASE("no demand") { CHECK(tune_foq(no_demand(), kPeriods) == FOQParams{0, 0}); }
    CHECK_THROWS_AS(tune_foq(deterministic(0.6), 9'999), InputError);
}

TEST_CASE("FOQ policy is constant") {
    const StateSpace space(preset_config({Country::Morocco, Storage::SaltCavern, 1.0}));
    const Policy p = foq_policy({14000, 0}, space);
    REQUIRE(p.size() == 231);
    for (const Action& a : p.actions) CHECK(a == Action{14000, 0});
    CHECK(foq_policy({0, 0}, space)[space.size() - 1] == Action{0, 0});
}

TEST_CASE("FOQ+ box") {
    const QuantityGrid g;
    CHECK(box_around({14000, 6000}, 2, g) == BoxBounds{10000, 18000, 2000, 10000});
    CHECK(box_around({0, 0}, 2, g) == BoxBounds{0, 4000, 0, 4000});
    CHECK(box_around({20000, 20000}, 2, g) == BoxBounds{16000, 20000, 16000, 20000});
    CHECK(box_around({8000, 8000}, 0, g) == BoxBounds{8000, 8000, 8000, 8000});
    CHECK_THROWS_AS(box_around({0, 0}, -1, g), InputError);
}

TEST_CASE("TBS policy") {
    const ProblemConfig c = preset_config({Country::Morocco, Storage::SaltCavern, 1.0});
    const StateSpace space(c);
    const Policy p = tbs_policy({10000, 8000}, space, c.grid);
    Quantity previous = std::numeric_limits<Quantity>::max();
    for (std::size_t s = 0; s < space.size(); ++s) {
        const Quantity inv = static_cast<Quantity>(space.inventory_units(s)) * space.step();
        CHECK(p[s].import_order == 8000);
        CHECK(p[s].local_request == std::max<Quantity>(0, 10000 - inv));
        if (space.state(s).import_pipeline == std::vector<Quantity>(space.state(s).import_pipeline.size(), 0)) {
            CHECK(p[s].local_request <= previous);
            previous = p[s].local_request;
        }
    }
    const Policy capped = tbs_policy({24000, 0}, c);
    CHECK(capped[0].local_request == 20000);
}

TEST_CASE("TBS tuning") {
    SUBCASE("import disabled") {
        ProblemConfig c = deterministic(1.0);
        c.costs.c_import = 1000.0;
        CHECK(tune_tbs(c, kPeriods) == TBSParams{14000, 0});
    }
    SUBCASE("no demand") { CHECK(tune_tbs(no_demand(), kPeriods) == TBSParams{0, 0}); }
    SUBCASE("result lies on the search grids") {
        const ProblemConfig c = preset_config({Country::Norway, Storage::CompressedGas, 1.0});
        const TBSParams t = tune_tbs(c, kPeriods);
        CHECK(t.threshold % c.grid.step == 0);
        CHECK(t.q_import % c.grid.step == 0);
        CHECK(t.threshold <= c.grid.max_inventory);
        CHECK(t.q_import <= c.grid.max_order_import);
    }
}

TEST_CASE("tuning is reproducible") {
    const ProblemConfig c = preset_config({Country::Norway, Storage::LiquidHydrogen, 1.2});
    CHECK(tune_foq(c, kPeriods, 3) == tune_foq(c, kPeriods, 3));
    CHECK(tune_tbs(c, kPeriods, 3) == tune_tbs(c, kPeriods, 3));
}

TEST_CASE("restricted solves dominate their fixed heuristics") {
    const double eps = SolverOptions{}.epsilon;
    for (Country country : {Country::Norway, Country::Morocco}) {
        const ProblemConfig c = preset_config({country, Storage::CompressedGas, 1.0});
        const Dynamics dyn(c);
        const double optimal = relative_value_iteration(dyn, restriction::Full{}).gain;

        const FOQParams foq = tune_foq(c, kPeriods);
        const double foq_gain = exact_policy_gain(foq_policy(foq, dyn.space()), dyn);
        const double foq_plus = build_foq_plus(c, foq).gain;
        CHECK(foq_plus <= foq_gain + 2 * eps);
        CHECK(optimal <= foq_plus + 2 * eps);

        const TBSParams tbs = tune_tbs(c, kPeriods);
        const double tbs_gain = exact_policy_gain(tbs_policy(tbs, c), dyn);
        const double tbs_plus = build_tbs_plus(c, tbs).gain;
        CHECK(tbs_plus <= tbs_gain + 2 * eps);
        CHECK(optimal <= tbs_plus + 2 * eps);
        // A zero-width box leaves only the threshold rule.
        CHECK(std::abs(build_tbs_plus(c, tbs, 0).gain - tbs_gain) <= 2 * eps);
    }
}

TEST_CASE("TBS+ import range") {
    const ProblemConfig c = preset_config({Country::Morocco, Storage::SaltCavern, 1.0});
    const SolveResult r = build_tbs_plus(c, {10000, 8000});
    const StateSpace space(c);
    for (std::size_t s = 0; s < space.size(); ++s) {
        CHECK(r.policy[s].import_order >= 4000);
        CHECK(r.policy[s].import_order <= 12000);
        const Quantity inv = static_cast<Quantity>(space.inventory_units(s)) * space.step();
        CHECK(r.policy[s].local_request == std::max<Quantity>(0, 10000 - inv));
    }
}

TEST_CASE("tuned parameters round-trip as JSON") {
    TunedParams t;
    t.label = "Morocco/SC/1.0";
    t.foq = {14000, 6000};
    t.tbs = {12000, 4000};
    t.periods = 100'000;
    t.seed = 42;
    std::stringstream ss;
    write_tuned_params(ss, t);
    const TunedParams back = read_tuned_params(ss);
    CHECK(back.label == t.label);
    CHECK(back.foq == t.foq);
    CHECK(back.tbs == t.tbs);
    CHECK(back.periods == t.periods);
    CHECK(back.seed == t.seed);

    std::istringstream broken("{\"foq\": {\"q_local\": 1}}");
    CHECK_THROWS_AS(read_tuned_params(broken), InputError);
    std::istringstream garbage("not json");
    CHECK_THROWS_AS(read_tuned_params(garbage), InputError);
}
