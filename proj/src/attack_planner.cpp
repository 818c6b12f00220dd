#include "reliance/attack_planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "reliance/errors.hpp"
#include "reliance/parallel.hpp"

namespace reliance {

std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // result * num / i is exact at every step; guard the multiplication.
        if (result > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        result = result * num / i;
    }
    return result;
}

std::vector<AttackVector> enumerate_strategies(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n)
        throw DomainError("budget k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    const std::uint64_t count = binomial(n, k);
    if (count > cap) throw EnumerationCapError(count, cap);

    std::vector<AttackVector> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<std::size_t> pos(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = i;
    for (;;) {
        AttackVector mask(n);
        for (auto p : pos) mask.set(p, true);
        out.push_back(std::move(mask));
        // Advance to the next combination in lexicographic order.
        std::size_t i = k;
        while (i > 0 && pos[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++pos[i - 1];
        for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
    return out;
}

AttackVector StrategyFamily::expand() const {
    if (kind == FamilyKind::Explicit) {
        if (mask.size() != n)
            throw DomainError("explicit family: mask length " + std::to_string(mask.size()) +
                              " != n=" + std::to_string(n));
        return mask;
    }
    const std::size_t need = (kind == FamilyKind::FirstTask || kind == FamilyKind::LastTask) ? 1 : 2;
    if (n < need)
        throw DomainError(std::string(to_string(kind)) + ": n=" + std::to_string(n) + " too small");
    AttackVector m(n);
    switch (kind) {
        case FamilyKind::FirstTask: m.set(0, true); break;
        case FamilyKind::LastTask: m.set(n - 1, true); break;
        case FamilyKind::FirstTwo: m.set(0, true); m.set(1, true); break;
        case FamilyKind::LastTwo: m.set(n - 2, true); m.set(n - 1, true); break;
        case FamilyKind::FirstAndLast: m.set(0, true); m.set(n - 1, true); break;
        case FamilyKind::Explicit: break;
    }
    return m;
}

std::string_view to_string(FamilyKind v) {
    switch (v) {
        case FamilyKind::FirstTask: return "first";
        case FamilyKind::LastTask: return "last";
        case FamilyKind::FirstTwo: return "first_two";
        case FamilyKind::LastTwo: return "last_two";
        case FamilyKind::FirstAndLast: return "first_and_last";
        case FamilyKind::Explicit: return "explicit";
    }
    return "?";
}

std::optional<FamilyKind> parse_family(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "first" || s == "first_task") return FamilyKind::FirstTask;
    if (s == "last" || s == "last_task") return FamilyKind::LastTask;
    if (s == "first_two") return FamilyKind::FirstTwo;
    if (s == "last_two") return FamilyKind::LastTwo;
    if (s == "first_and_last") return FamilyKind::FirstAndLast;
    return std::nullopt;
}

void validate(const ErrorRates& rates) {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw DomainError(std::string(name) + ": must be in [0,1], got " + std::to_string(v));
    };
    check(rates.human, "e_H");
    check(rates.model, "e_M");
    check(rates.attacked, "e_A");
}

std::optional<int> recovery_index(double r_after_attack, double alpha, double c, double d_high,
                                  double r_hat, std::size_t n, TieBreak tie_break) {
    RelianceState state{r_after_attack, 2};
    if (trust_decision(state, r_hat, tie_break)) return 0;
    const double target = c * d_high;
    for (std::size_t task = 3; task <= n; ++task) {
        state = smoothed_reliance(state, target, alpha, /*clamp=*/false);
        if (trust_decision(state, r_hat, tie_break)) return static_cast<int>(task) - 1;
    }
    return std::nullopt;
}

double closed_form_one_time(std::size_t n, OneTimePosition position, const ErrorRates& rates) {
    if (n < 2) throw DomainError("one-time closed form: n must be >= 2");
    validate(rates);
    const double rest = position == OneTimePosition::First ? rates.human : rates.model;
    return (rates.attacked + static_cast<double>(n - 1) * rest) / static_cast<double>(n);
}

double closed_form_two_time(std::size_t n, FamilyKind family, const ErrorRates& rates,
                            int recovery_k) {
    if (n < 3) throw DomainError("two-time closed form: n must be >= 3");
    validate(rates);
    const double nn = static_cast<double>(n);
    switch (family) {
        case FamilyKind::FirstTwo:
            return (rates.attacked + (nn - 1.0) * rates.human) / nn;
        case FamilyKind::LastTwo:
            return ((nn - 2.0) * rates.model + rates.attacked + rates.human) / nn;
        case FamilyKind::FirstAndLast: {
            if (recovery_k < 2 || static_cast<std::size_t>(recovery_k) > n - 2)
                throw DomainError("first_and_last: recovery index k=" + std::to_string(recovery_k) +
                                  " outside [2, " + std::to_string(n - 2) + "]");
            const double k = recovery_k;
            return (rates.attacked + (k - 1.0) * rates.human + (nn - k - 1.0) * rates.model +
                    rates.attacked) /
                   nn;
        }
        default:
            throw UnsupportedFamilyError("two-time closed form: unsupported family '" +
                                         std::string(to_string(family)) + "'");
    }
}

std::vector<StrategyScore> evaluate_strategies(std::size_t n, std::size_t k,
                                               const StrategyEvaluator& evaluator, unsigned jobs,
                                               std::uint64_t cap) {
    std::vector<AttackVector> masks = enumerate_strategies(n, k, cap);
    std::vector<StrategyScore> out(masks.size());
    parallel_for(masks.size(), jobs, [&](std::size_t i) {
        out[i].score = evaluator(masks[i], masks[i].code());
        out[i].mask = std::move(masks[i]);
    });
    return out;
}

StrategyScore pick_best(std::span<const StrategyScore> scores) {
    if (scores.empty()) throw DomainError("no strategies to choose from");
    const StrategyScore* best = &scores[0];
    for (const auto& s : scores)
        if (s.score > best->score) best = &s;
    return *best;
}

StrategyScore pick_worst(std::span<const StrategyScore> scores) {
    if (scores.empty()) throw DomainError("no strategies to choose from");
    const StrategyScore* worst = &scores[0];
    for (const auto& s : scores)
        if (s.score < worst->score) worst = &s;
    return *worst;
}

StrategyScore best_strategy(std::size_t n, std::size_t k, const StrategyEvaluator& evaluator,
                            unsigned jobs, std::uint64_t cap) {
    return pick_best(evaluate_strategies(n, k, evaluator, jobs, cap));
}

StrategyScore worst_strategy(std::size_t n, std::size_t k, const StrategyEvaluator& evaluator,
                             unsigned jobs, std::uint64_t cap) {
    return pick_worst(evaluate_strategies(n, k, evaluator, jobs, cap));
}

namespace {

// Probability that the executed prediction is wrong.
double source_error(const TaskRecord& rec, const ErrorRates& rates, FallbackPolicy fallback) {
    switch (rec.executed) {
        case Executed::Model: return rates.model;
        case Executed::AttackedModel: return rates.attacked;
        case Executed::Human: return rates.human;
        case Executed::Fallback:
            switch (fallback) {
                case FallbackPolicy::EqualsExecutedModel:
                    return rec.attacked ? rates.attacked : rates.model;
                case FallbackPolicy::FixedCorrect: return 0.0;
                case FallbackPolicy::FixedWrong: return 1.0;
            }
    }
    return 0.0;
}

WorldSample uniform_world(std::size_t n, bool correct, const FixedScores& scores) {
    WorldSample w;
    w.tasks.assign(n, TaskOutcome{correct, correct, correct, scores.d_low, scores.d_high});
    return w;
}

}  // namespace

double expected_attack_score(const RelianceConfig& config, std::span<const TaskProfile> profiles,
                             const AttackVector& attack, const ErrorRates& rates,
                             const FixedScores& scores, const LossSpec& loss) {
    validate(rates);
    if (config.feedback_policy == FeedbackPolicy::CorrectnessConditioned)
        return expected_attack_score_enumerated(config, profiles, attack, rates, scores, loss);

    // Outcomes do not feed back into reliance here, so one trajectory covers
    // every realization and per-task losses are independent.
    const std::size_t n = attack.size();
    const DecisionTrace trace =
        run_episode(config, profiles, attack, uniform_world(n, true, scores), loss);
    std::vector<double> expected(n);
    for (std::size_t i = 0; i < n; ++i)
        expected[i] = source_error(trace.tasks[i], rates, config.fallback_policy);
    return aggregate_attack_score(expected, loss);
}

double expected_attack_score_enumerated(const RelianceConfig& config,
                                        std::span<const TaskProfile> profiles,
                                        const AttackVector& attack, const ErrorRates& rates,
                                        const FixedScores& scores, const LossSpec& loss) {
    validate(rates);
    const std::size_t n = attack.size();
    if (n == 0 || n > 20) throw DomainError("enumerated expectation requires 1 <= n <= 20");

    WorldSample world = uniform_world(n, true, scores);
    double total = 0.0;
    for (std::uint32_t pattern = 0; pattern < (1u << n); ++pattern) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool bit = (pattern >> i) & 1u;
            world.tasks[i].model_correct = bit;
            world.tasks[i].human_correct = bit;
            world.tasks[i].attacked_correct = bit;
        }
        const DecisionTrace trace = run_episode(config, profiles, attack, world, loss);
        double prob = 1.0;
        for (std::size_t i = 0; i < n && prob > 0.0; ++i) {
            const double err = source_error(trace.tasks[i], rates, config.fallback_policy);
            prob *= ((pattern >> i) & 1u) ? 1.0 - err : err;
        }
        if (prob > 0.0) total += prob * trace.attack_score;
    }
    return total;
}

}  // namespace reliance
