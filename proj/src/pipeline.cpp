#include "reliance/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "reliance/errors.hpp"

namespace reliance {

AttackVector::AttackVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] > 1)
            throw DomainError("attack mask: element " + std::to_string(i + 1) + " is not 0/1");
    }
}

AttackVector AttackVector::parse(std::string_view text) {
    if (text.empty()) throw DomainError("attack mask: empty");
    std::vector<std::uint8_t> bits;
    bits.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch != '0' && ch != '1')
            throw DomainError("attack mask: invalid character '" + std::string(1, ch) +
                              "' at position " + std::to_string(i + 1));
        bits.push_back(ch == '1' ? 1 : 0);
    }
    return AttackVector(std::move(bits));
}

std::size_t AttackVector::budget() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::uint64_t AttackVector::code() const {
    if (bits_.size() > 64) throw DomainError("attack mask: code() requires n <= 64");
    std::uint64_t v = 0;
    for (auto b : bits_) v = (v << 1) | b;
    return v;
}

std::string AttackVector::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

Resolution resolve_prediction(bool trusted, bool assessment_passed, bool attacked,
                              const WorldSample& world, std::size_t task,
                              FallbackPolicy fallback) {
    if (task >= world.size())
        throw DomainError("task index " + std::to_string(task + 1) + " outside [1, " +
                          std::to_string(world.size()) + "]");
    const TaskOutcome& t = world.tasks[task];
    const bool model_output_correct = attacked ? t.attacked_correct : t.model_correct;
    const Executed model_source = attacked ? Executed::AttackedModel : Executed::Model;

    if (assessment_passed) return {model_source, model_output_correct};
    if (!trusted) return {Executed::Human, t.human_correct};

    switch (fallback) {
        case FallbackPolicy::EqualsExecutedModel: return {Executed::Fallback, model_output_correct};
        case FallbackPolicy::FixedCorrect: return {Executed::Fallback, true};
        case FallbackPolicy::FixedWrong: return {Executed::Fallback, false};
    }
    return {Executed::Fallback, model_output_correct};
}

FeedbackScore generate_feedback(FeedbackPolicy policy, bool trusted, bool attacked,
                                bool executed_correct, const WorldSample& world,
                                std::size_t task) {
    if (task >= world.size())
        throw DomainError("task index " + std::to_string(task + 1) + " outside [1, " +
                          std::to_string(world.size()) + "]");
    const TaskOutcome& t = world.tasks[task];
    bool low = false;
    switch (policy) {
        case FeedbackPolicy::AttackConditioned: low = attacked; break;
        case FeedbackPolicy::CorrectnessConditioned: low = !executed_correct; break;
        case FeedbackPolicy::TrustConditioned: low = !trusted; break;
    }
    return {low ? t.d_low : t.d_high, trusted ? FeedbackKind::ModelOnly : FeedbackKind::HumanModel};
}

double per_task_attack_score(bool executed_correct, const LossSpec& /*loss*/) {
    // With binary outcomes |y - y'| and the 0-1 loss coincide.
    return executed_correct ? 0.0 : 1.0;
}

double absolute_loss(double truth, double prediction) { return std::abs(truth - prediction); }

double aggregate_attack_score(std::span<const double> scores, const LossSpec& loss) {
    if (scores.empty()) throw DomainError("attack score aggregation: empty sequence");
    if (loss.aggregation == Aggregation::Product)
        return std::accumulate(scores.begin(), scores.end(), 1.0, std::multiplies<>());
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

DecisionTrace run_episode(const RelianceConfig& config, std::span<const TaskProfile> profiles,
                          const AttackVector& attack, const WorldSample& world,
                          const LossSpec& loss) {
    validate(config);
    const std::size_t n = attack.size();
    if (n == 0) throw ConfigError("episode: attack vector is empty");
    if (world.size() != n)
        throw ConfigError("episode: world has " + std::to_string(world.size()) +
                          " tasks, attack vector has " + std::to_string(n));
    if (profiles.size() != n && profiles.size() != 1)
        throw ConfigError("episode: expected 1 or " + std::to_string(n) + " task profiles, got " +
                          std::to_string(profiles.size()));

    std::vector<double> irrelevant(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i)
        irrelevant[i] = model_irrelevant_factor(profiles[i], config.weights);
    // Reliance computed after task i gates task i+1, so it uses that task's factors.
    auto factor_for_next = [&](std::size_t i) {
        if (irrelevant.size() == 1) return irrelevant[0];
        return irrelevant[std::min(i + 1, n - 1)];
    };

    DecisionTrace trace;
    trace.tasks.reserve(n);
    std::vector<double> scores;
    scores.reserve(n);
    RelianceState state{config.r_init, 1};

    for (std::size_t i = 0; i < n; ++i) {
        TaskRecord rec;
        rec.task_index = state.task_index;
        rec.attacked = attack.attacked(i);
        rec.reliance_before = state.smoothed;
        rec.trusted = trust_decision(state, config.r_hat, config.tie_break);

        if (config.assessment_mode == AssessmentMode::FollowsTrust) {
            rec.assessment_passed = rec.trusted;
        } else {
            const TaskOutcome& t = world.tasks[i];
            const bool model_output_correct = rec.attacked ? t.attacked_correct : t.model_correct;
            const FeedbackScore assessed = generate_feedback(
                config.feedback_policy, rec.trusted, rec.attacked, model_output_correct, world, i);
            rec.assessment_passed =
                assessed.d >= (rec.trusted ? config.theta_m : config.theta_h);
        }

        const Resolution res = resolve_prediction(rec.trusted, rec.assessment_passed, rec.attacked,
                                                  world, i, config.fallback_policy);
        rec.executed = res.executed;
        rec.executed_correct = res.correct;
        rec.attack_score = per_task_attack_score(res.correct, loss);
        scores.push_back(rec.attack_score);

        const FeedbackScore fb = generate_feedback(config.feedback_policy, rec.trusted,
                                                   rec.attacked, res.correct, world, i);
        rec.feedback = fb.d;
        const double r_new =
            instantaneous_reliance(performance_feedback(fb, config.c), factor_for_next(i),
                                   config.gamma, config.clamp_reliance);
        state = smoothed_reliance(state, r_new, config.alpha, config.clamp_reliance);
        rec.reliance_after = state.smoothed;
        trace.tasks.push_back(rec);
    }
    trace.attack_score = aggregate_attack_score(scores, loss);
    return trace;
}

std::string_view to_string(Executed v) {
    switch (v) {
        case Executed::Model: return "MODEL";
        case Executed::AttackedModel: return "ATTACKED_MODEL";
        case Executed::Human: return "HUMAN";
        case Executed::Fallback: return "FALLBACK";
    }
    return "?";
}

std::string_view to_string(LossKind v) { return v == LossKind::ZeroOne ? "zero_one" : "absolute"; }

std::string_view to_string(Aggregation v) { return v == Aggregation::Mean ? "mean" : "product"; }

}  // namespace reliance
