#include "reliance/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "reliance/errors.hpp"
#include "reliance/parallel.hpp"
#include "reliance/rng.hpp"

namespace reliance {
namespace {

void require_probability(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw DomainError(std::string(name) + ": must be in [0,1], got " + std::to_string(v));
}

void require_range(const Range& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo < 0.0 || r.hi > 1.0 || r.lo > r.hi)
        throw DomainError(std::string(name) + ": need 0 <= lo <= hi <= 1");
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

WorldSample draw_world(const StochasticSpec& spec, std::uint64_t seed, const FixedScores* fixed) {
    SplitMix64 rng(seed);
    WorldSample world;
    world.tasks.resize(spec.n);
    for (auto& t : world.tasks) {
        t.model_correct = rng.uniform() < spec.p_m;
        t.human_correct = rng.uniform() < spec.p_h;
        t.attacked_correct = rng.uniform() < 1.0 - spec.p_a;
        const double u_low = rng.uniform();
        const double u_high = rng.uniform();
        if (fixed) {
            t.d_low = fixed->d_low;
            t.d_high = fixed->d_high;
        } else {
            t.d_low = spec.d_low.lo + u_low * (spec.d_low.hi - spec.d_low.lo);
            t.d_high = spec.d_high.lo + u_high * (spec.d_high.hi - spec.d_high.lo);
        }
    }
    return world;
}

}  // namespace

void validate(const StochasticSpec& spec) {
    require_probability(spec.p_m, "p_m");
    require_probability(spec.p_h, "p_h");
    require_probability(spec.p_a, "p_a");
    require_range(spec.d_low, "d_low_range");
    require_range(spec.d_high, "d_high_range");
    if (spec.n < 1 || spec.n > 64) throw DomainError("n: must be in [1, 64]");
    if (spec.replications < 1) throw DomainError("replications: must be >= 1");
}

WorldSample sample_world(const StochasticSpec& spec, std::uint64_t seed) {
    return draw_world(spec, seed, nullptr);
}

WorldSample sample_world(const StochasticSpec& spec, std::uint64_t seed, const FixedScores& fixed) {
    return draw_world(spec, seed, &fixed);
}

std::vector<double> replicate(const Scenario& scenario, const AttackVector& strategy, unsigned jobs) {
    const StochasticSpec& spec = scenario.stochastic;
    validate(spec);
    if (strategy.size() != spec.n)
        throw ConfigError("strategy length " + std::to_string(strategy.size()) + " != n=" +
                          std::to_string(spec.n));
    const std::uint64_t ordinal = strategy.code();
    const FixedScores* fixed = scenario.fixed_scores ? &*scenario.fixed_scores : nullptr;
    std::vector<double> out(spec.replications);
    parallel_for(out.size(), jobs, [&](std::size_t r) {
        const WorldSample world = draw_world(spec, derive_seed(spec.base_seed, ordinal, r), fixed);
        out[r] = run_episode(scenario.reliance, scenario.profiles, strategy, world, scenario.loss)
                     .attack_score;
    });
    return out;
}

DistributionStats compute_stats(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("statistics of an empty sample");
    DistributionStats s;
    s.count = samples.size();
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count));

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q25 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q75 = quantile_sorted(sorted, 0.75);
    return s;
}

AttackCountResult evaluate_attack_count(const Scenario& scenario, std::size_t k, unsigned jobs,
                                        std::uint64_t cap) {
    const std::vector<AttackVector> masks = enumerate_strategies(scenario.stochastic.n, k, cap);
    std::vector<std::vector<double>> samples(masks.size());
    parallel_for(masks.size(), jobs, [&](std::size_t i) { samples[i] = replicate(scenario, masks[i]); });

    AttackCountResult result;
    result.k = k;
    result.placements.reserve(masks.size());
    std::vector<double> pooled;
    pooled.reserve(masks.size() * scenario.stochastic.replications);
    std::vector<StrategyScore> means;
    means.reserve(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        PlacementResult p{masks[i], compute_stats(samples[i])};
        p.stats.argmax_strategy_id = masks[i].code();
        means.push_back({masks[i], p.stats.mean});
        pooled.insert(pooled.end(), samples[i].begin(), samples[i].end());
        result.placements.push_back(std::move(p));
    }
    const StrategyScore best = pick_best(means);
    const StrategyScore worst = pick_worst(means);
    result.best_mask = best.mask;
    result.best_mean = best.score;
    result.worst_mask = worst.mask;
    result.worst_mean = worst.score;
    result.pooled = compute_stats(pooled);
    result.pooled.argmax_strategy_id = best.mask.code();
    return result;
}

std::vector<AttackCountResult> distribution_by_attack_count(const Scenario& scenario,
                                                            std::span<const std::size_t> budgets,
                                                            unsigned jobs, std::uint64_t cap) {
    std::vector<AttackCountResult> out;
    out.reserve(budgets.size());
    for (std::size_t k : budgets) out.push_back(evaluate_attack_count(scenario, k, jobs, cap));
    return out;
}

std::string_view to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::ModelAccuracy: return "model_acc";
        case SweepParameter::HumanAccuracy: return "human_acc";
        case SweepParameter::CombinedAccuracy: return "combined_acc";
        case SweepParameter::RelianceThreshold: return "reliance_threshold";
    }
    return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) {
    for (auto p : {SweepParameter::ModelAccuracy, SweepParameter::HumanAccuracy,
                   SweepParameter::CombinedAccuracy, SweepParameter::RelianceThreshold})
        if (name == to_string(p)) return p;
    return std::nullopt;
}

std::string SweepValue::label(SweepParameter p) const {
    if (p == SweepParameter::CombinedAccuracy) return fmt::format("{}:{}", value, secondary);
    return fmt::format("{}", value);
}

void validate(const SweepGrid& grid, std::size_t n) {
    if (grid.values.empty()) throw DomainError("sweep values: empty");
    if (grid.attack_counts.empty()) throw DomainError("sweep attack counts: empty");
    for (const auto& v : grid.values) {
        require_probability(v.value, "sweep value");
        if (grid.parameter == SweepParameter::CombinedAccuracy)
            require_probability(v.secondary, "sweep value (p_h)");
    }
    for (auto k : grid.attack_counts)
        if (k > n) throw DomainError("attack count " + std::to_string(k) + " exceeds n");
}

SweepGrid default_grid(SweepParameter p, std::size_t n) {
    SweepGrid g;
    g.parameter = p;
    switch (p) {
        case SweepParameter::ModelAccuracy:
        case SweepParameter::HumanAccuracy:
            for (double v : {0.2, 0.4, 0.6, 0.8}) g.values.push_back({v, 0.0});
            break;
        case SweepParameter::CombinedAccuracy:
            g.values = {{0.2, 0.2}, {0.2, 0.8}, {0.8, 0.2}, {0.8, 0.8}};
            break;
        case SweepParameter::RelianceThreshold:
            for (int i = 1; i <= 9; ++i) g.values.push_back({i / 10.0, 0.0});
            break;
    }
    for (std::size_t k = 0; k <= n; ++k) g.attack_counts.push_back(k);
    return g;
}

Scenario apply_sweep_value(const Scenario& base, SweepParameter p, const SweepValue& v) {
    Scenario s = base;
    switch (p) {
        case SweepParameter::ModelAccuracy: s.stochastic.p_m = v.value; break;
        case SweepParameter::HumanAccuracy: s.stochastic.p_h = v.value; break;
        case SweepParameter::CombinedAccuracy:
            s.stochastic.p_m = v.value;
            s.stochastic.p_h = v.secondary;
            break;
        case SweepParameter::RelianceThreshold: s.reliance.r_hat = v.value; break;
    }
    return s;
}

std::vector<SweepRow> sensitivity_sweep(const SweepGrid& grid, const Scenario& base, unsigned jobs,
                                        std::uint64_t cap) {
    validate(grid, base.stochastic.n);
    std::vector<SweepRow> rows;
    for (const auto& value : grid.values) {
        const Scenario scenario = apply_sweep_value(base, grid.parameter, value);
        const std::size_t first = rows.size();
        for (std::size_t k : grid.attack_counts) {
            const AttackCountResult r = evaluate_attack_count(scenario, k, jobs, cap);
            SweepRow row;
            row.parameter = grid.parameter;
            row.value = value;
            row.n_attacks = k;
            row.mean_as = r.pooled.mean;
            row.std_as = r.pooled.std;
            row.max_as = r.best_mean;
            row.best_mask = r.best_mask;
            row.n_samples = r.pooled.count;
            rows.push_back(std::move(row));
        }
        std::size_t opt = first;
        for (std::size_t i = first; i < rows.size(); ++i)
            if (rows[i].max_as > rows[opt].max_as) opt = i;
        rows[opt].optimal = true;
    }
    return rows;
}

}  // namespace reliance
