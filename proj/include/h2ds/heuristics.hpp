#pragma once

#include "h2ds/simulator.hpp"

#include <cstdint>
#include <iosfwd>

namespace h2ds {

/// Fixed order quantities for both sources.
struct FOQParams {
    Quantity q_local = 0;
    Quantity q_import = 0;

    bool operator==(const FOQParams&) const = default;
};

struct BoxBounds {
    Quantity local_min = 0, local_max = 0, import_min = 0, import_max = 0;

    bool operator==(const BoxBounds&) const = default;
};

/// Tailored base-surge: constant import, local top-up to a threshold.
struct TBSParams {
    Quantity threshold = 0;
    Quantity q_import = 0;

    bool operator==(const TBSParams&) const = default;
};

inline constexpr long kMinTuningPeriods = 10'000;
inline constexpr int kDefaultWidthSteps = 2;

/// Simulation settings used by the parameter searches. Every candidate is
/// evaluated on the same random stream (common random numbers).
SimOptions tuning_options(long periods, std::uint64_t seed);

FOQParams tune_foq(const ProblemConfig& config, long periods = 100'000, std::uint64_t seed = 1);
Policy foq_policy(const FOQParams& params, const StateSpace& space);

/// center +- width_steps grid steps, clamped to [0, max order].
BoxBounds box_around(const FOQParams& center, int width_steps, const QuantityGrid& grid);
SolveResult build_foq_plus(const ProblemConfig& config, const FOQParams& center, int width_steps = kDefaultWidthSteps,
                           const SolverOptions& options = {});

TBSParams tune_tbs(const ProblemConfig& config, long periods = 100'000, std::uint64_t seed = 1);
Policy tbs_policy(const TBSParams& params, const StateSpace& space, const QuantityGrid& grid);
Policy tbs_policy(const TBSParams& params, const ProblemConfig& config);
SolveResult build_tbs_plus(const ProblemConfig& config, const TBSParams& params, int width_steps = kDefaultWidthSteps,
                           const SolverOptions& options = {});

/// Tuned parameters as a small JSON record, so later runs can pin them.
struct TunedParams {
    std::string label;
    FOQParams foq;
    TBSParams tbs;
    long periods = 0;
    std::uint64_t seed = 0;
};

void write_tuned_params(std::ostream& out, const TunedParams& params);
TunedParams read_tuned_params(std::istream& in);

}  // namespace h2ds
