#pragma once

// Attack timing strategies: enumeration, the closed-form attack scores of
// the one- and two-attack strategies, the trust recovery index, and
// exhaustive best/worst search.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "reliance/pipeline.hpp"

namespace reliance {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// All C(n,k) masks. Order: attack positions in lexicographic order, so
/// (n=3,k=1) gives 100, 010, 001. Throws EnumerationCapError above `cap`.
std::vector<AttackVector> enumerate_strategies(std::size_t n, std::size_t k,
                                               std::uint64_t cap = kDefaultEnumerationCap);

enum class FamilyKind { FirstTask, LastTask, FirstTwo, LastTwo, FirstAndLast, Explicit };

struct StrategyFamily {
    FamilyKind kind = FamilyKind::FirstTask;
    std::size_t n = 0;
    AttackVector mask;  // only for Explicit

    AttackVector expand() const;
    std::size_t budget() const { return expand().budget(); }
};

std::string_view to_string(FamilyKind v);
/// Accepts first, last, first_two, last_two, first_and_last (case-insensitive).
std::optional<FamilyKind> parse_family(std::string_view name);

/// Expected per-task losses of human, clean model and attacked model.
struct ErrorRates {
    double human = 0.1;     // e_H
    double model = 0.2;     // e_M
    double attacked = 1.0;  // e_A
};

void validate(const ErrorRates& rates);

/// Index k of the last untrusted task for an attack on task 1, where
/// `r_after_attack` is the smoothed reliance entering task 2 and later
/// tasks feed back c * d_high. Returns 0 when task 2 is already trusted,
/// nullopt when trust is not regained by task n.
std::optional<int> recovery_index(double r_after_attack, double alpha, double c, double d_high,
                                  double r_hat, std::size_t n, TieBreak tie_break);

enum class OneTimePosition { First, Last };

/// FIRST: (e_A + (n-1) e_H) / n.  LAST: (e_A + (n-1) e_M) / n.
double closed_form_one_time(std::size_t n, OneTimePosition position, const ErrorRates& rates);

/// FirstTwo, LastTwo and FirstAndLast. `recovery_k` is used only by
/// FirstAndLast and must lie in [2, n-2].
double closed_form_two_time(std::size_t n, FamilyKind family, const ErrorRates& rates,
                            int recovery_k = 0);

/// Scores one mask; `ordinal` is the mask's code, used for seed derivation.
using StrategyEvaluator = std::function<double(const AttackVector& mask, std::uint64_t ordinal)>;

struct StrategyScore {
    AttackVector mask;
    double score = 0.0;
};

/// Evaluates every mask of budget k, in enumeration order. `jobs` bounds
/// worker threads (0 = hardware concurrency); results do not depend on it.
std::vector<StrategyScore> evaluate_strategies(std::size_t n, std::size_t k,
                                               const StrategyEvaluator& evaluator,
                                               unsigned jobs = 1,
                                               std::uint64_t cap = kDefaultEnumerationCap);

/// Argmax; ties go to the earliest mask in enumeration order.
StrategyScore best_strategy(std::size_t n, std::size_t k, const StrategyEvaluator& evaluator,
                            unsigned jobs = 1, std::uint64_t cap = kDefaultEnumerationCap);
StrategyScore worst_strategy(std::size_t n, std::size_t k, const StrategyEvaluator& evaluator,
                             unsigned jobs = 1, std::uint64_t cap = kDefaultEnumerationCap);

StrategyScore pick_best(std::span<const StrategyScore> scores);
StrategyScore pick_worst(std::span<const StrategyScore> scores);

/// Fixed evaluation scores of the deterministic regime.
struct FixedScores {
    double d_low = 0.3;
    double d_high = 0.7;
};

/// Exact expected attack score of `attack`, computed by driving
/// run_episode with deterministic evaluation scores and the given
/// per-source error rates (an attacked prediction errs with rate e_A).
double expected_attack_score(const RelianceConfig& config, std::span<const TaskProfile> profiles,
                             const AttackVector& attack, const ErrorRates& rates,
                             const FixedScores& scores, const LossSpec& loss);

/// Same expectation by summing over all 2^n executed-correctness patterns.
/// Valid for every feedback policy; n <= 20.
double expected_attack_score_enumerated(const RelianceConfig& config,
                                        std::span<const TaskProfile> profiles,
                                        const AttackVector& attack, const ErrorRates& rates,
                                        const FixedScores& scores, const LossSpec& loss);

}  // namespace reliance
