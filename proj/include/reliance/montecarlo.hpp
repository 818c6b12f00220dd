#pragma once

// Seeded stochastic worlds, replicated episodes, distribution statistics
// per attack count, and parameter sensitivity sweeps.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "reliance/attack_planner.hpp"
#include "reliance/pipeline.hpp"

namespace reliance {

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

struct StochasticSpec {
    double p_m = 0.8;
    double p_h = 0.9;
    double p_a = 1.0;
    Range d_low{0.0, 0.3};
    Range d_high{0.7, 1.0};
    std::size_t n = 10;
    std::size_t replications = 1000;
    std::uint64_t base_seed = 0;

    /// Expected per-task losses implied by the accuracies.
    ErrorRates error_rates() const { return {1.0 - p_h, 1.0 - p_m, p_a}; }
};

void validate(const StochasticSpec& spec);

/// Per task, in this draw order: model, human, attacked (Bernoulli by
/// u < p), then d_low and d_high (uniform on [lo, hi)).
WorldSample sample_world(const StochasticSpec& spec, std::uint64_t seed);

/// Same draws for the correctness flags, with d_low/d_high fixed.
WorldSample sample_world(const StochasticSpec& spec, std::uint64_t seed, const FixedScores& fixed);

/// Everything needed to run episodes of one configuration.
struct Scenario {
    RelianceConfig reliance;
    std::vector<TaskProfile> profiles;  // length n, or 1 (broadcast)
    StochasticSpec stochastic;
    LossSpec loss;
    std::optional<FixedScores> fixed_scores;  // deterministic d values when set
};

/// R attack scores; world r uses derive_seed(base_seed, mask.code(), r).
std::vector<double> replicate(const Scenario& scenario, const AttackVector& strategy,
                              unsigned jobs = 1);

struct DistributionStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    std::uint64_t argmax_strategy_id = 0;  // strategy with the highest mean AS
    std::size_t count = 0;
};

/// Order statistics use linear interpolation between closest ranks.
DistributionStats compute_stats(std::span<const double> samples);

struct PlacementResult {
    AttackVector mask;
    DistributionStats stats;  // over the R replications of this mask
};

struct AttackCountResult {
    std::size_t k = 0;
    DistributionStats pooled;                 // all placements x replications
    std::vector<PlacementResult> placements;  // enumeration order
    AttackVector best_mask;                   // highest per-placement mean
    double best_mean = 0.0;
    AttackVector worst_mask;
    double worst_mean = 0.0;
};

AttackCountResult evaluate_attack_count(const Scenario& scenario, std::size_t k, unsigned jobs = 1,
                                        std::uint64_t cap = kDefaultEnumerationCap);

std::vector<AttackCountResult> distribution_by_attack_count(const Scenario& scenario,
                                                            std::span<const std::size_t> budgets,
                                                            unsigned jobs = 1,
                                                            std::uint64_t cap = kDefaultEnumerationCap);

enum class SweepParameter { ModelAccuracy, HumanAccuracy, CombinedAccuracy, RelianceThreshold };

std::string_view to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(std::string_view name);

/// For CombinedAccuracy `value` is p_m and `secondary` is p_h.
struct SweepValue {
    double value = 0.0;
    double secondary = 0.0;
    std::string label(SweepParameter p) const;
};

struct SweepGrid {
    SweepParameter parameter = SweepParameter::ModelAccuracy;
    std::vector<SweepValue> values;
    std::vector<std::size_t> attack_counts;
};

void validate(const SweepGrid& grid, std::size_t n);

/// The grids of the four sensitivity panels.
SweepGrid default_grid(SweepParameter p, std::size_t n);

/// Applies one grid value to a copy of the scenario.
Scenario apply_sweep_value(const Scenario& base, SweepParameter p, const SweepValue& v);

struct SweepRow {
    SweepParameter parameter = SweepParameter::ModelAccuracy;
    SweepValue value;
    std::size_t n_attacks = 0;
    double mean_as = 0.0;
    double std_as = 0.0;
    double max_as = 0.0;  // best placement mean
    AttackVector best_mask;
    std::size_t n_samples = 0;
    bool optimal = false;  // k with the highest max_as for this value
};

std::vector<SweepRow> sensitivity_sweep(const SweepGrid& grid, const Scenario& base,
                                        unsigned jobs = 1,
                                        std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace reliance
