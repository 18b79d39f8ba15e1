#include "h2ds/solver.hpp"

#include "h2ds/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace h2ds {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr long kStallSweeps = 200;

struct Span {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double x) {
        min = std::min(min, x);
        max = std::max(max, x);
    }
    double width() const { return max - min; }
    double mid() const { return 0.5 * (max + min); }
};

// Scale of a typical stage cost, used to make argmin ties scale invariant.
double cost_magnitude(const ProblemConfig& config) {
    const auto& c = config.costs;
    const double top = std::max({c.c_local, c.c_import, c.c_hold, c.c_penalty});
    return top * static_cast<double>(config.grid.step) * kCostScale;
}

void check_on_grid(Quantity q, Quantity limit, const QuantityGrid& grid, const char* what) {
    if (!grid.on_grid(q) || q > limit)
        throw ConfigError(std::string("action restriction: ") + what + " = " + std::to_string(q) +
                          " is off the grid or beyond the order limit");
}

// Synchronous Bellman operator specialised to the structure of the
// transition: E_K[ f(min(K, local)) ] with f built from tables that
// integrate demand and import yield once per sweep.
class BellmanSweep {
public:
    BellmanSweep(const Dynamics& dyn, const ActionRestriction& restriction)
        : dyn_(dyn), space_(dyn.space()), restriction_(restriction) {
        inv_max_ = dyn.max_inventory_units();
        local_max_ = dyn.max_local_units();
        import_max_ = dyn.max_import_units();
        immediate_local_ = dyn.config().lead_local == 0;
        np_ = space_.pipeline_count();
        ni_ = space_.import_pipeline_count();
        y_levels_ = immediate_local_ ? inv_max_ + local_max_ + 1 : inv_max_ + 1;
        al_levels_ = immediate_local_ ? 1 : local_max_ + 1;

        expected_inventory_cost_.assign(static_cast<std::size_t>(y_levels_), 0.0);
        const auto& demand = dyn.demand();
        for (int y = 0; y < y_levels_; ++y)
            for (std::size_t d = 0; d < demand.units.size(); ++d)
                expected_inventory_cost_[static_cast<std::size_t>(y)] +=
                    demand.probs[d] * dyn.inventory_cost_units(y - demand.units[d]);

        capacity_exact_.assign(static_cast<std::size_t>(local_max_) + 1, 0.0);
        capacity_tail_.assign(static_cast<std::size_t>(local_max_) + 1, 0.0);
        const auto& cap = dyn.capacity();
        for (std::size_t k = 0; k < cap.units.size(); ++k) {
            const int units = cap.units[k];
            if (units <= local_max_) capacity_exact_[static_cast<std::size_t>(units)] += cap.probs[k];
            for (int x = 0; x <= std::min(units, local_max_); ++x)
                capacity_tail_[static_cast<std::size_t>(x)] += cap.probs[k];
        }
        for (int x = 0; x <= local_max_; ++x) local_cost_.push_back(dyn.cost_units(x, 0));
        for (int q = 0; q <= import_max_; ++q) import_cost_.push_back(dyn.cost_units(0, q));

        arrival_table_.resize(static_cast<std::size_t>(import_max_ + 1) * static_cast<std::size_t>(inv_max_ + 1) * np_);
        next_table_.resize(static_cast<std::size_t>(al_levels_) * static_cast<std::size_t>(y_levels_) *
                           static_cast<std::size_t>(import_max_ + 1) * np_);
        tie_tolerance_ = 1e-12 * cost_magnitude(dyn.config());
    }

    // values -> updated values; returns greedy actions when `policy` is set.
    void apply(std::span<const double> values, std::span<double> out, std::vector<Action>* policy) {
        build_tables(values);
        const Quantity step = space_.step();
        std::vector<double> f(static_cast<std::size_t>(local_max_) + 1);
        std::vector<double> q_buffer;
        for (std::size_t s = 0; s < space_.size(); ++s) {
            const ActionBox box = admissible_box(restriction_, dyn_, s);
            const int inv = space_.inventory_units(s);
            const std::size_t pipe = space_.pipeline_of(s);
            const std::size_t local_idx = pipe / ni_;
            const std::size_t import_idx = pipe % ni_;
            const int n_import = box.import_hi - box.import_lo + 1;
            q_buffer.assign(static_cast<std::size_t>((box.local_hi - box.local_lo + 1) * n_import), 0.0);

            for (int qi = box.import_lo; qi <= box.import_hi; ++qi) {
                const auto imp = space_.shift_import(import_idx, qi);
                for (int x = 0; x <= box.local_hi; ++x) {
                    double g;
                    if (immediate_local_) {
                        g = next(0, inv + x, imp.arriving, imp.remainder);
                    } else {
                        const auto loc = space_.shift_local(local_idx, x);
                        g = next(loc.arriving, inv, imp.arriving, loc.remainder * ni_ + imp.remainder);
                    }
                    f[static_cast<std::size_t>(x)] = local_cost_[static_cast<std::size_t>(x)] + g;
                }
                double below = 0.0;  // sum over K < local of P(K) f(K)
                for (int ql = 0; ql <= box.local_hi; ++ql) {
                    if (ql >= box.local_lo) {
                        const double q = import_cost_[static_cast<std::size_t>(qi)] + below +
                                         capacity_tail_[static_cast<std::size_t>(ql)] * f[static_cast<std::size_t>(ql)];
                        q_buffer[static_cast<std::size_t>((ql - box.local_lo) * n_import + (qi - box.import_lo))] = q;
                    }
                    below += capacity_exact_[static_cast<std::size_t>(ql)] * f[static_cast<std::size_t>(ql)];
                }
            }

            std::size_t best = 0;
            for (std::size_t i = 1; i < q_buffer.size(); ++i)
                if (q_buffer[i] < q_buffer[best] - tie_tolerance_) best = i;
            out[s] = q_buffer[best];
            if (policy) {
                const int ql = box.local_lo + static_cast<int>(best) / n_import;
                const int qi = box.import_lo + static_cast<int>(best) % n_import;
                (*policy)[s] = Action{ql * step, qi * step};
            }
        }
    }

private:
    double next(int arriving_local, int y, int arriving_order, std::size_t pipe) const {
        return next_table_[((static_cast<std::size_t>(arriving_local) * static_cast<std::size_t>(y_levels_) +
                             static_cast<std::size_t>(y)) *
                                static_cast<std::size_t>(import_max_ + 1) +
                            static_cast<std::size_t>(arriving_order)) *
                               np_ +
                           pipe];
    }

    void build_tables(std::span<const double> values) {
        const std::size_t inv_levels = static_cast<std::size_t>(inv_max_) + 1;
        // E_a V(min(x + a, I), pipe) for the order o that is arriving.
        for (int o = 0; o <= import_max_; ++o) {
            const auto& arr = dyn_.arrival(o);
            for (int x = 0; x <= inv_max_; ++x) {
                double* row = &arrival_table_[(static_cast<std::size_t>(o) * inv_levels + static_cast<std::size_t>(x)) * np_];
                std::fill(row, row + np_, 0.0);
                for (std::size_t a = 0; a < arr.units.size(); ++a) {
                    const int level = std::min(x + arr.units[a], inv_max_);
                    const double* v = &values[static_cast<std::size_t>(level) * np_];
                    const double p = arr.probs[a];
                    for (std::size_t k = 0; k < np_; ++k) row[k] += p * v[k];
                }
            }
        }
        // Inventory cost plus expected continuation, integrated over demand.
        const auto& demand = dyn_.demand();
        for (int al = 0; al < al_levels_; ++al) {
            for (int y = 0; y < y_levels_; ++y) {
                for (int o = 0; o <= import_max_; ++o) {
                    double* row = &next_table_[((static_cast<std::size_t>(al) * static_cast<std::size_t>(y_levels_) +
                                                 static_cast<std::size_t>(y)) *
                                                    static_cast<std::size_t>(import_max_ + 1) +
                                                static_cast<std::size_t>(o)) *
                                               np_];
                    std::fill(row, row + np_, expected_inventory_cost_[static_cast<std::size_t>(y)]);
                    for (std::size_t d = 0; d < demand.units.size(); ++d) {
                        const int x = std::min(std::max(y - demand.units[d], 0) + al, inv_max_);
                        const double* a =
                            &arrival_table_[(static_cast<std::size_t>(o) * inv_levels + static_cast<std::size_t>(x)) * np_];
                        const double p = demand.probs[d];
                        for (std::size_t k = 0; k < np_; ++k) row[k] += p * a[k];
                    }
                }
            }
        }
    }

    const Dynamics& dyn_;
    const StateSpace& space_;
    const ActionRestriction& restriction_;
    int inv_max_ = 0, local_max_ = 0, import_max_ = 0;
    bool immediate_local_ = true;
    std::size_t np_ = 1, ni_ = 1;
    int y_levels_ = 0, al_levels_ = 1;
    std::vector<double> expected_inventory_cost_;
    std::vector<double> capacity_exact_, capacity_tail_;
    std::vector<double> local_cost_, import_cost_;
    std::vector<double> arrival_table_, next_table_;
    double tie_tolerance_ = 0.0;
};

struct PolicyRows {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> next;
    std::vector<double> prob;
    std::vector<double> cost;  // expected stage cost per state
};

PolicyRows build_rows(const Policy& policy, const Dynamics& dyn) {
    if (policy.size() != dyn.space().size())
        throw InputError("policy covers " + std::to_string(policy.size()) + " states, state space has " +
                         std::to_string(dyn.space().size()));
    PolicyRows rows;
    rows.offsets.push_back(0);
    for (std::size_t s = 0; s < policy.size(); ++s) {
        double c = 0.0;
        for (const auto& e : dyn.successors(s, policy[s])) {
            rows.next.push_back(e.next_index);
            rows.prob.push_back(e.prob);
            c += e.prob * e.stage_cost;
        }
        rows.cost.push_back(c);
        rows.offsets.push_back(rows.next.size());
    }
    return rows;
}

// Cesaro limit of the state distribution started in `start`, through the
// lazy chain (I + P) / 2 which has the same limit and no periodicity.
bool evaluate_from_state(const PolicyRows& rows, std::size_t start, double tolerance, long max_iterations,
                         double& gain) {
    const std::size_t n = rows.cost.size();
    std::vector<double> mu(n, 0.0), next(n);
    mu[start] = 1.0;
    for (long it = 0; it < max_iterations; ++it) {
        for (std::size_t s = 0; s < n; ++s) next[s] = 0.5 * mu[s];
        for (std::size_t s = 0; s < n; ++s) {
            if (mu[s] == 0.0) continue;
            for (std::size_t e = rows.offsets[s]; e < rows.offsets[s + 1]; ++e)
                next[rows.next[e]] += 0.5 * mu[s] * rows.prob[e];
        }
        double moved = 0.0, g = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            moved += std::abs(next[s] - mu[s]);
            g += next[s] * rows.cost[s];
        }
        mu.swap(next);
        if (moved * std::max(1.0, *std::max_element(rows.cost.begin(), rows.cost.end())) < tolerance) {
            gain = g;
            return true;
        }
    }
    return false;
}

bool evaluate_rows(const PolicyRows& rows, double tolerance, long max_iterations, double damping, double& gain) {
    const std::size_t n = rows.cost.size();
    std::vector<double> h(n, 0.0), h_next(n);
    for (long it = 0; it < max_iterations; ++it) {
        Span diff;
        for (std::size_t s = 0; s < n; ++s) {
            double v = rows.cost[s];
            for (std::size_t e = rows.offsets[s]; e < rows.offsets[s + 1]; ++e) v += rows.prob[e] * h[rows.next[e]];
            h_next[s] = (1.0 - damping) * h[s] + damping * v;
            diff.add(h_next[s] - h[s]);
        }
        const double ref = h_next[0];
        for (std::size_t s = 0; s < n; ++s) h[s] = h_next[s] - ref;
        if (diff.width() / damping < tolerance) {
            gain = diff.mid() / damping;
            return true;
        }
    }
    return false;
}

}  // namespace

Quantity threshold_local_request(Quantity threshold, Quantity inventory, const QuantityGrid& grid) {
    const Quantity gap = std::max<Quantity>(0, threshold - inventory);
    const Quantity rounded = (gap + grid.step - 1) / grid.step * grid.step;
    return std::min(rounded, grid.max_order_local);
}

void check_restriction(const ActionRestriction& r, const ProblemConfig& config) {
    const auto& g = config.grid;
    auto range = [&](Quantity lo, Quantity hi, Quantity limit, const char* what) {
        check_on_grid(lo, limit, g, what);
        check_on_grid(hi, limit, g, what);
        if (lo > hi) throw ConfigError(std::string("action restriction: empty ") + what + " range");
    };
    std::visit(overloaded{
                   [](const restriction::Full&) {},
                   [](const restriction::LocalOnly&) {},
                   [](const restriction::ImportOnly&) {},
                   [&](const restriction::Fixed& f) {
                       check_on_grid(f.local, g.max_order_local, g, "local");
                       check_on_grid(f.import, g.max_order_import, g, "import");
                   },
                   [&](const restriction::Box& b) {
                       range(b.local_lo, b.local_hi, g.max_order_local, "local");
                       range(b.import_lo, b.import_hi, g.max_order_import, "import");
                   },
                   [&](const restriction::Tbs& t) {
                       if (t.threshold < 0) throw ConfigError("action restriction: negative threshold");
                       check_on_grid(t.import, g.max_order_import, g, "import");
                   },
                   [&](const restriction::TbsPlus& t) {
                       if (t.threshold < 0) throw ConfigError("action restriction: negative threshold");
                       range(t.import_lo, t.import_hi, g.max_order_import, "import");
                   },
               },
               r);
}

ActionBox admissible_box(const ActionRestriction& r, const Dynamics& dyn, std::size_t state) {
    const Quantity step = dyn.config().grid.step;
    auto u = [step](Quantity q) { return static_cast<int>(q / step); };
    const int lmax = dyn.max_local_units();
    const int imax = dyn.max_import_units();
    return std::visit(
        overloaded{
            [&](const restriction::Full&) { return ActionBox{0, lmax, 0, imax}; },
            [&](const restriction::LocalOnly&) { return ActionBox{0, lmax, 0, 0}; },
            [&](const restriction::ImportOnly&) { return ActionBox{0, 0, 0, imax}; },
            [&](const restriction::Fixed& f) { return ActionBox{u(f.local), u(f.local), u(f.import), u(f.import)}; },
            [&](const restriction::Box& b) {
                return ActionBox{u(b.local_lo), u(b.local_hi), u(b.import_lo), u(b.import_hi)};
            },
            [&](const restriction::Tbs& t) {
                const Quantity inv = dyn.space().inventory_units(state) * step;
                const int local = u(threshold_local_request(t.threshold, inv, dyn.config().grid));
                return ActionBox{local, local, u(t.import), u(t.import)};
            },
            [&](const restriction::TbsPlus& t) {
                const Quantity inv = dyn.space().inventory_units(state) * step;
                const int local = u(threshold_local_request(t.threshold, inv, dyn.config().grid));
                return ActionBox{local, local, u(t.import_lo), u(t.import_hi)};
            },
        },
        r);
}

SolveResult relative_value_iteration(const Dynamics& dyn, const ActionRestriction& restriction,
                                     const SolverOptions& options) {
    if (!(options.epsilon > 0.0)) throw ConfigError("solver: epsilon must be positive");
    if (options.max_iterations < 1) throw ConfigError("solver: max_iterations must be >= 1");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) throw ConfigError("solver: damping must be in (0, 1]");
    const std::size_t n = dyn.space().size();
    if (options.reference_state >= n) throw ConfigError("solver: reference state out of range");
    check_restriction(restriction, dyn.config());

    BellmanSweep sweep(dyn, restriction);
    std::vector<double> values(n, 0.0), updated(n);
    SolveResult result;
    result.policy.actions.resize(n);
    double beta = options.damping;
    Span diff;
    double best_span = std::numeric_limits<double>::infinity();
    long stalled = 0;
    for (long it = 1; it <= options.max_iterations; ++it) {
        sweep.apply(values, updated, nullptr);
        diff = Span{};
        for (std::size_t s = 0; s < n; ++s) {
            updated[s] = (1.0 - beta) * values[s] + beta * updated[s];
            diff.add(updated[s] - values[s]);
        }
        if (diff.width() / beta < options.epsilon) {
            // Greedy policy with respect to the current (normalised) values.
            sweep.apply(values, updated, &result.policy.actions);
            result.gain = diff.mid() / beta;
            result.span_residual = diff.width() / beta;
            result.bias = std::move(values);
            result.iterations = it;
            return result;
        }
        const double ref = updated[options.reference_state];
        for (std::size_t s = 0; s < n; ++s) values[s] = updated[s] - ref;

        // A span that stops shrinking signals a periodic optimal chain;
        // switch to the aperiodicity transform, which keeps gain and policy.
        if (diff.width() < 0.99 * best_span) {
            best_span = diff.width();
            stalled = 0;
        } else if (++stalled >= kStallSweeps && beta == 1.0) {
            beta = 0.5;
            stalled = 0;
            best_span = std::numeric_limits<double>::infinity();
        }
    }
    throw ConvergenceError("relative value iteration did not converge within " +
                               std::to_string(options.max_iterations) + " sweeps (span " +
                               std::to_string(diff.width() / beta) + ")",
                           diff.width() / beta, options.max_iterations);
}

SolveResult relative_value_iteration(const ProblemConfig& config, const ActionRestriction& restriction,
                                     const SolverOptions& options) {
    return relative_value_iteration(Dynamics(config), restriction, options);
}

std::vector<double> expected_stage_costs(const Policy& policy, const Dynamics& dyn) {
    return build_rows(policy, dyn).cost;
}

double exact_policy_gain(const Policy& policy, const Dynamics& dyn, double tolerance, long max_iterations) {
    if (!(tolerance > 0.0)) throw InputError("exact_policy_gain: tolerance must be positive");
    const PolicyRows rows = build_rows(policy, dyn);
    double gain = 0.0;
    if (evaluate_rows(rows, tolerance, max_iterations, 1.0, gain)) return gain;
    // Periodic chains oscillate under plain iteration; averaging removes it.
    if (evaluate_rows(rows, tolerance, max_iterations, 0.5, gain)) return gain;
    // Several recurrent classes: report the gain seen from the empty state.
    if (evaluate_from_state(rows, 0, tolerance, max_iterations, gain)) return gain;
    throw ConvergenceError("policy evaluation did not converge", std::numeric_limits<double>::quiet_NaN(),
                           3 * max_iterations);
}

double exact_policy_gain(const Policy& policy, const ProblemConfig& config, double tolerance, long max_iterations) {
    return exact_policy_gain(policy, Dynamics(config), tolerance, max_iterations);
}

double brute_force_optimal_gain(const ProblemConfig& config) {
    const Dynamics dyn(config);
    const std::size_t n = dyn.space().size();
    const int local_n = dyn.max_local_units() + 1;
    const int import_n = dyn.max_import_units() + 1;
    const std::size_t actions = static_cast<std::size_t>(local_n * import_n);
    if (std::pow(static_cast<double>(actions), static_cast<double>(n)) > kBruteForceLimit)
        throw CapacityError("brute force: " + std::to_string(actions) + "^" + std::to_string(n) +
                            " policies exceed the enumeration limit");

    // Transition matrix and expected cost of every (state, action) pair.
    const Quantity step = config.grid.step;
    std::vector<Eigen::VectorXd> rows(n * actions);
    std::vector<double> costs(n * actions);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < actions; ++a) {
            const Action act{static_cast<Quantity>(a) / import_n * step, static_cast<Quantity>(a) % import_n * step};
            Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            double c = 0.0;
            for (const auto& e : dyn.successors(s, act)) {
                row[static_cast<Eigen::Index>(e.next_index)] += e.prob;
                c += e.prob * e.stage_cost;
            }
            rows[s * actions + a] = std::move(row);
            costs[s * actions + a] = c;
        }
    }

    // Gain vector of each policy: P* c with P* the limit of the lazy chain
    // (I + P) / 2, reached by repeated squaring. Valid for multichain and
    // periodic policies alike.
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> choice(n, 0);
    Eigen::MatrixXd lazy(dim, dim);
    Eigen::VectorXd cost(dim);
    while (true) {
        for (std::size_t s = 0; s < n; ++s) {
            lazy.row(static_cast<Eigen::Index>(s)) = 0.5 * rows[s * actions + choice[s]].transpose();
            lazy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += 0.5;
            cost[static_cast<Eigen::Index>(s)] = costs[s * actions + choice[s]];
        }
        // Row sums drift by rounding and the drift doubles with every
        // squaring, so rows are renormalised each time.
        for (int k = 0; k < 48; ++k) {
            Eigen::MatrixXd next = lazy * lazy;
            next.array().colwise() /= next.rowwise().sum().array();
            const bool settled = (next - lazy).cwiseAbs().maxCoeff() < 1e-15;
            lazy = std::move(next);
            if (settled) break;
        }
        best = best.cwiseMin(lazy * cost);

        std::size_t pos = 0;
        while (pos < n && ++choice[pos] == actions) choice[pos++] = 0;
        if (pos == n) break;
    }
    if (best.maxCoeff() - best.minCoeff() > 1e-7)
        throw ConfigError("brute force: optimal gain depends on the initial state (instance not weakly communicating)");
    return best.mean();
}

void write_solution_csv(std::ostream& out, const SolveResult& result, const StateSpace& space) {
    out << "index,inventory,local_pipeline,import_pipeline,local_request,import_order,bias\n";
    auto join = [](const std::vector<Quantity>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
        return s;
    };
    const auto old_precision = out.precision(10);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const State st = space.state(i);
        out << i << ',' << st.inventory << ',' << join(st.local_pipeline) << ',' << join(st.import_pipeline) << ','
            << result.policy[i].local_request << ',' << result.policy[i].import_order << ',' << result.bias[i] << '\n';
    }
    out.precision(old_precision);
}

}  // namespace h2ds
