#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace h2ds {

/// Hydrogen quantity in tonnes.
using Quantity = std::int64_t;

/// One cost unit is (price in EUR/kg) x (quantity in tonnes) / 1000.
inline constexpr double kCostScale = 1e-3;

struct QuantityGrid {
    Quantity step = 2000;
    Quantity max_order_local = 20000;
    Quantity max_order_import = 20000;
    Quantity max_inventory = 40000;

    int inventory_levels() const { return static_cast<int>(max_inventory / step) + 1; }
    int local_levels() const { return static_cast<int>(max_order_local / step) + 1; }
    int import_levels() const { return static_cast<int>(max_order_import / step) + 1; }
    bool on_grid(Quantity q) const { return q >= 0 && q % step == 0; }
};

enum class DistributionKind { Capacity, Demand, YieldLoss };

std::string_view to_string(DistributionKind kind);

/// Normal distribution family parameterised by a variability level:
/// sigma = varl * (mean - lower). Capacity and demand are in tonnes,
/// yield loss is a fraction of the ordered quantity.
struct DistributionSpec {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double varl = 0.0;
    DistributionKind kind = DistributionKind::Demand;

    double sigma() const { return varl * (mean - lower); }
};

/// Probability mass function over grid quantities.
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;
    DiscreteDistribution(std::vector<Quantity> support, std::vector<double> probs);

    static DiscreteDistribution point_mass(Quantity q) { return {{q}, {1.0}}; }

    const std::vector<Quantity>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return support_.size(); }

    double mean() const;
    /// P(X <= q)
    double cdf(Quantity q) const;
    /// Probability of exactly q (0 when q is off the support).
    double prob(Quantity q) const;

private:
    std::vector<Quantity> support_;
    std::vector<double> probs_;
};

struct CostParams {
    double c_local = 0.0;    // EUR/kg delivered from the local supplier
    double c_import = 0.0;   // EUR/kg ordered from import
    double c_hold = 0.0;     // EUR/kg per period
    double c_penalty = 0.0;  // EUR/kg of lost demand

    CostParams scaled(double factor) const {
        return {c_local * factor, c_import * factor, c_hold * factor, c_penalty * factor};
    }
};

struct ProblemConfig {
    QuantityGrid grid;
    int lead_local = 0;
    int lead_import = 1;
    CostParams costs;
    DistributionSpec capacity{10000, 0, 20000, 0.5, DistributionKind::Capacity};
    DistributionSpec demand{14000, 6000, 22000, 0.5, DistributionKind::Demand};
    DistributionSpec yield_loss{0.175, 0.0, 0.35, 0.5, DistributionKind::YieldLoss};
    std::string label;
};

/// Checks every invariant of the configuration. Hard violations throw
/// ConfigError; soft problems are returned as warnings.
std::vector<std::string> validate(const ProblemConfig& config);

enum class Country { Norway, Morocco, UAE };
enum class Storage { SaltCavern, CompressedGas, LiquidHydrogen };

struct ScenarioPreset {
    Country country = Country::Morocco;
    Storage storage = Storage::SaltCavern;
    double rho = 1.0;
};

std::string_view to_string(Country c);
/// Short code: SC, CG or LH.
std::string_view to_string(Storage s);
Country parse_country(std::string_view text);
Storage parse_storage(std::string_view text);
/// Parses "country/storage/rho", e.g. "Morocco/SC/1.0".
ScenarioPreset parse_preset(std::string_view text);
std::string preset_label(const ScenarioPreset& preset);

int import_lead_time(Country c);
double import_cost(Country c);
/// Weekly holding cost: seven times the midpoint of the daily storage range.
double holding_cost(Storage s);

inline constexpr double kPenaltyCost = 30.0;
inline constexpr double kBaseVarL = 0.5;

ProblemConfig preset_config(const ScenarioPreset& preset, double varl_c = kBaseVarL,
                            double varl_d = kBaseVarL, double varl_y = kBaseVarL);

/// Bin-integrated normal on the grid multiples of [lower, upper].
///
/// Each support point g owns the cell [g - step/2, g + step/2); the normal
/// is truncated to the union of the cells and renormalised. A zero sigma
/// gives a point mass on the support point nearest the mean.
DiscreteDistribution discretize_truncated_normal(const DistributionSpec& spec, Quantity grid_step);

DiscreteDistribution capacity_pmf(const ProblemConfig& config);
DiscreteDistribution demand_pmf(const ProblemConfig& config);

/// Distribution of the quantity that arrives from an import order of
/// `order_qty` tonnes: (1 - loss) * order_qty rounded to the nearest grid
/// point (exact midpoints round up), loss truncated normal on
/// [yield_loss.lower, yield_loss.upper].
DiscreteDistribution arrival_pmf(Quantity order_qty, const ProblemConfig& config);

/// Nearest grid multiple of x; exact midpoints round up.
Quantity round_to_grid(double x, Quantity step);

/// Standard normal CDF.
double normal_cdf(double z);

/// Scenario file: INI-style sections [scenario] [grid] [costs] [leads]
/// [capacity] [demand] [yield]. An optional `preset = country/storage/rho`
/// key in [scenario] seeds the values that the other sections override.
ProblemConfig read_scenario(std::istream& in);
ProblemConfig load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const ProblemConfig& config);

}  // namespace h2ds
