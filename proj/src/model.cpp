#include "h2ds/model.hpp"

#include "h2ds/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace h2ds {

namespace {

constexpr double kProbTolerance = 1e-12;

std::string lower_case(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// P(a < Z <= b) for a standard normal, evaluated on the tail that keeps
// precision.
double normal_mass(double a, double b) {
    if (b <= a) return 0.0;
    if (a >= 0.0) return 0.5 * (std::erfc(a / std::sqrt(2.0)) - std::erfc(b / std::sqrt(2.0)));
    return normal_cdf(b) - normal_cdf(a);
}

void check_spec(const DistributionSpec& spec) {
    const std::string name{to_string(spec.kind)};
    if (!(spec.lower <= spec.mean && spec.mean <= spec.upper))
        throw ConfigError(name + " distribution: require lower <= mean <= upper");
    if (!(spec.varl >= 0.0)) throw ConfigError(name + " distribution: varl must be >= 0");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Quantity round_to_grid(double x, Quantity step) {
    const double units = x / static_cast<double>(step);
    // Absorb representation error so that exact midpoints round up.
    return static_cast<Quantity>(std::floor(units + 0.5 + 1e-9)) * step;
}

std::string_view to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::Capacity: return "capacity";
        case DistributionKind::Demand: return "demand";
        case DistributionKind::YieldLoss: return "yield-loss";
    }
    return "unknown";
}

DiscreteDistribution::DiscreteDistribution(std::vector<Quantity> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.size() != probs_.size() || support_.empty())
        throw InputError("DiscreteDistribution: support and probabilities must be non-empty and aligned");
    double total = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (probs_[i] < 0.0) throw InputError("DiscreteDistribution: negative probability");
        if (i > 0 && support_[i] <= support_[i - 1])
            throw InputError("DiscreteDistribution: support must be strictly increasing");
        total += probs_[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("DiscreteDistribution: probabilities do not sum to 1");
    for (double& p : probs_) p /= total;
}

double DiscreteDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += probs_[i] * static_cast<double>(support_[i]);
    return m;
}

double DiscreteDistribution::cdf(Quantity q) const {
    double c = 0.0;
    for (std::size_t i = 0; i < size() && support_[i] <= q; ++i) c += probs_[i];
    return std::min(c, 1.0);
}

double DiscreteDistribution::prob(Quantity q) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), q);
    if (it == support_.end() || *it != q) return 0.0;
    return probs_[static_cast<std::size_t>(it - support_.begin())];
}

std::vector<std::string> validate(const ProblemConfig& config) {
    std::vector<std::string> warnings;
    const auto& g = config.grid;
    if (g.step <= 0) throw ConfigError("grid: step must be positive");
    for (auto [name, value] : {std::pair{"max_order_local", g.max_order_local},
                               std::pair{"max_order_import", g.max_order_import},
                               std::pair{"max_inventory", g.max_inventory}}) {
        if (!g.on_grid(value))
            throw ConfigError(std::string("grid: ") + name + " must be a non-negative multiple of step");
    }
    if (config.lead_local < 0) throw ConfigError("leads: lead_local must be >= 0");
    if (config.lead_import <= config.lead_local)
        throw ConfigError("leads: lead_import must exceed lead_local");

    const auto& c = config.costs;
    if (c.c_local < 0 || c.c_import < 0 || c.c_hold < 0 || c.c_penalty < 0)
        throw ConfigError("costs: all cost parameters must be non-negative");
    if (c.c_penalty <= c.c_import)
        warnings.emplace_back("costs: c_penalty <= c_import, never importing is trivially optimal");

    check_spec(config.capacity);
    check_spec(config.demand);
    check_spec(config.yield_loss);
    if (config.yield_loss.lower < 0.0 || config.yield_loss.upper > 1.0)
        throw ConfigError("yield: loss support must lie in [0, 1]");
    if (config.capacity.lower < 0.0 || config.demand.lower < 0.0)
        throw ConfigError("capacity/demand: lower bound must be >= 0");

    const auto demand = demand_pmf(config);
    if (demand.support().back() > g.max_inventory)
        throw ConfigError("grid: max_inventory must cover the largest demand realisation");
    capacity_pmf(config);
    return warnings;
}

// --- presets ---------------------------------------------------------------

std::string_view to_string(Country c) {
    switch (c) {
        case Country::Norway: return "Norway";
        case Country::Morocco: return "Morocco";
        case Country::UAE: return "UAE";
    }
    return "unknown";
}

std::string_view to_string(Storage s) {
    switch (s) {
        case Storage::SaltCavern: return "SC";
        case Storage::CompressedGas: return "CG";
        case Storage::LiquidHydrogen: return "LH";
    }
    return "unknown";
}

Country parse_country(std::string_view text) {
    const auto t = lower_case(text);
    if (t == "norway") return Country::Norway;
    if (t == "morocco") return Country::Morocco;
    if (t == "uae") return Country::UAE;
    throw InputError("unknown country '" + std::string(text) + "'");
}

Storage parse_storage(std::string_view text) {
    const auto t = lower_case(text);
    if (t == "sc" || t == "saltcavern") return Storage::SaltCavern;
    if (t == "cg" || t == "compressedgas") return Storage::CompressedGas;
    if (t == "lh" || t == "liquidhydrogen") return Storage::LiquidHydrogen;
    throw InputError("unknown storage '" + std::string(text) + "'");
}

ScenarioPreset parse_preset(std::string_view text) {
    const auto a = text.find('/');
    const auto b = a == std::string_view::npos ? a : text.find('/', a + 1);
    if (b == std::string_view::npos) throw InputError("preset must look like country/storage/rho");
    ScenarioPreset p;
    p.country = parse_country(text.substr(0, a));
    p.storage = parse_storage(text.substr(a + 1, b - a - 1));
    try {
        p.rho = std::stod(std::string(text.substr(b + 1)));
    } catch (const std::exception&) {
        throw InputError("preset: bad rho in '" + std::string(text) + "'");
    }
    if (!(p.rho > 0.0)) throw InputError("preset: rho must be positive");
    return p;
}

std::string preset_label(const ScenarioPreset& preset) {
    std::ostringstream os;
    os << to_string(preset.country) << '/' << to_string(preset.storage) << '/' << preset.rho;
    return os.str();
}

int import_lead_time(Country c) {
    switch (c) {
        case Country::Norway: return 1;
        case Country::Morocco: return 2;
        case Country::UAE: return 3;
    }
    return 1;
}

double import_cost(Country c) {
    switch (c) {
        case Country::Norway: return 8.62;
        case Country::Morocco: return 5.76;
        case Country::UAE: return 6.27;
    }
    return 0.0;
}

double holding_cost(Storage s) {
    // Daily EUR/kg ranges per storage technology.
    auto weekly = [](double lo, double hi) { return 7.0 * (lo + hi) / 2.0; };
    switch (s) {
        case Storage::SaltCavern: return weekly(0.2, 0.6);
        case Storage::CompressedGas: return weekly(1.1, 3.5);
        case Storage::LiquidHydrogen: return weekly(2.0, 5.0);
    }
    return 0.0;
}

ProblemConfig preset_config(const ScenarioPreset& preset, double varl_c, double varl_d, double varl_y) {
    if (!(preset.rho > 0.0)) throw InputError("preset: rho must be positive");
    if (varl_c < 0 || varl_d < 0 || varl_y < 0) throw InputError("preset: VarL values must be >= 0");
    ProblemConfig config;
    config.grid = QuantityGrid{2000, 20000, 20000, 40000};
    config.lead_local = 0;
    config.lead_import = import_lead_time(preset.country);
    config.costs.c_import = import_cost(preset.country);
    config.costs.c_local = preset.rho * config.costs.c_import;
    config.costs.c_hold = holding_cost(preset.storage);
    config.costs.c_penalty = kPenaltyCost;
    config.capacity = {10000, 0, 20000, varl_c, DistributionKind::Capacity};
    config.demand = {14000, 6000, 22000, varl_d, DistributionKind::Demand};
    config.yield_loss = {0.175, 0.0, 0.35, varl_y, DistributionKind::YieldLoss};
    config.label = preset_label(preset);
    return config;
}

// --- distributions ---------------------------------------------------------

DiscreteDistribution discretize_truncated_normal(const DistributionSpec& spec, Quantity grid_step) {
    check_spec(spec);
    if (grid_step <= 0) throw InputError("grid step must be positive");
    const auto step = static_cast<double>(grid_step);
    const auto first = static_cast<Quantity>(std::ceil(spec.lower / step - 1e-9)) * grid_step;
    const auto last = static_cast<Quantity>(std::floor(spec.upper / step + 1e-9)) * grid_step;
    if (last < first)
        throw ConfigError(std::string(to_string(spec.kind)) + " distribution: no grid point in [lower, upper]");

    std::vector<Quantity> support;
    for (Quantity g = first; g <= last; g += grid_step) support.push_back(g);

    auto point_mass_nearest = [&] {
        const Quantity q = std::clamp(round_to_grid(spec.mean, grid_step), first, last);
        return DiscreteDistribution::point_mass(q);
    };

    const double sigma = spec.sigma();
    if (sigma <= 0.0) return point_mass_nearest();

    std::vector<double> probs(support.size());
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        const double g = static_cast<double>(support[i]);
        probs[i] = normal_mass((g - step / 2 - spec.mean) / sigma, (g + step / 2 - spec.mean) / sigma);
        total += probs[i];
    }
    if (!(total > 0.0)) return point_mass_nearest();
    for (double& p : probs) p /= total;
    return {std::move(support), std::move(probs)};
}

DiscreteDistribution capacity_pmf(const ProblemConfig& config) {
    return discretize_truncated_normal(config.capacity, config.grid.step);
}

DiscreteDistribution demand_pmf(const ProblemConfig& config) {
    return discretize_truncated_normal(config.demand, config.grid.step);
}

DiscreteDistribution arrival_pmf(Quantity order_qty, const ProblemConfig& config) {
    const auto& grid = config.grid;
    if (!grid.on_grid(order_qty) || order_qty > grid.max_order_import)
        throw InputError("arrival_pmf: order quantity " + std::to_string(order_qty) +
                         " is not an admissible import order");
    if (order_qty == 0) return DiscreteDistribution::point_mass(0);

    const auto& loss = config.yield_loss;
    const double sigma = loss.sigma();
    const double order = static_cast<double>(order_qty);
    if (sigma <= 0.0) return DiscreteDistribution::point_mass(round_to_grid((1.0 - loss.mean) * order, grid.step));

    const double z_lo = (loss.lower - loss.mean) / sigma;
    const double z_hi = (loss.upper - loss.mean) / sigma;
    const double mass = normal_mass(z_lo, z_hi);
    if (!(mass > 0.0)) return DiscreteDistribution::point_mass(round_to_grid((1.0 - loss.mean) * order, grid.step));

    const double half = static_cast<double>(grid.step) / 2.0;
    const Quantity smallest = round_to_grid((1.0 - loss.upper) * order, grid.step);
    std::vector<Quantity> support;
    std::vector<double> probs;
    for (Quantity g = smallest; g <= order_qty; g += grid.step) {
        // a = g  <=>  (1 - loss) * order in [g - half, g + half)
        //        <=>  loss in (1 - (g + half) / order, 1 - (g - half) / order]
        const double lo = std::max(1.0 - (static_cast<double>(g) + half) / order, loss.lower);
        const double hi = std::min(1.0 - (static_cast<double>(g) - half) / order, loss.upper);
        if (hi <= lo) continue;
        const double p = normal_mass((lo - loss.mean) / sigma, (hi - loss.mean) / sigma) / mass;
        if (p <= 0.0) continue;
        support.push_back(g);
        probs.push_back(p);
    }
    double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= total;
    return {std::move(support), std::move(probs)};
}

// --- scenario files --------------------------------------------------------

namespace {

namespace pt = boost::property_tree;

// ptree::get with a default swallows conversion failures; this does not.
template <class T>
T value_or(const pt::ptree& tree, const std::string& key, T fallback) {
    return tree.get_child_optional(key) ? tree.get<T>(key) : fallback;
}

void read_distribution(const pt::ptree& tree, const std::string& section, DistributionSpec& spec) {
    spec.mean = value_or(tree, section + ".mean", spec.mean);
    spec.lower = value_or(tree, section + ".lower", spec.lower);
    spec.upper = value_or(tree, section + ".upper", spec.upper);
    spec.varl = value_or(tree, section + ".varl", spec.varl);
}

void write_distribution(pt::ptree& tree, const std::string& section, const DistributionSpec& spec) {
    tree.put(section + ".mean", spec.mean);
    tree.put(section + ".lower", spec.lower);
    tree.put(section + ".upper", spec.upper);
    tree.put(section + ".varl", spec.varl);
}

}  // namespace

ProblemConfig read_scenario(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("scenario file: ") + e.what());
    }
    try {
        ProblemConfig config;
        if (auto preset = tree.get_optional<std::string>("scenario.preset"))
            config = preset_config(parse_preset(*preset));
        config.label = value_or(tree, "scenario.label", config.label);

        auto& g = config.grid;
        g.step = value_or(tree, "grid.step", g.step);
        g.max_order_local = value_or(tree, "grid.max_order_local", g.max_order_local);
        g.max_order_import = value_or(tree, "grid.max_order_import", g.max_order_import);
        g.max_inventory = value_or(tree, "grid.max_inventory", g.max_inventory);

        auto& c = config.costs;
        c.c_local = value_or(tree, "costs.c_local", c.c_local);
        c.c_import = value_or(tree, "costs.c_import", c.c_import);
        c.c_hold = value_or(tree, "costs.c_hold", c.c_hold);
        c.c_penalty = value_or(tree, "costs.c_penalty", c.c_penalty);

        config.lead_local = value_or(tree, "leads.lead_local", config.lead_local);
        config.lead_import = value_or(tree, "leads.lead_import", config.lead_import);

        read_distribution(tree, "capacity", config.capacity);
        read_distribution(tree, "demand", config.demand);
        read_distribution(tree, "yield", config.yield_loss);
        validate(config);
        return config;
    } catch (const pt::ptree_error& e) {
        throw ConfigError(std::string("scenario file: ") + e.what());
    }
}

ProblemConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    return read_scenario(in);
}

void write_scenario(std::ostream& out, const ProblemConfig& config) {
    pt::ptree tree;
    tree.put("scenario.label", config.label);
    tree.put("grid.step", config.grid.step);
    tree.put("grid.max_order_local", config.grid.max_order_local);
    tree.put("grid.max_order_import", config.grid.max_order_import);
    tree.put("grid.max_inventory", config.grid.max_inventory);
    tree.put("costs.c_local", config.costs.c_local);
    tree.put("costs.c_import", config.costs.c_import);
    tree.put("costs.c_hold", config.costs.c_hold);
    tree.put("costs.c_penalty", config.costs.c_penalty);
    tree.put("leads.lead_local", config.lead_local);
    tree.put("leads.lead_import", config.lead_import);
    write_distribution(tree, "capacity", config.capacity);
    write_distribution(tree, "demand", config.demand);
    write_distribution(tree, "yield", config.yield_loss);
    pt::write_ini(out, tree);
}

}  // namespace h2ds
