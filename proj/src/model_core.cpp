#include "reliance/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reliance/errors.hpp"

namespace reliance {
namespace {

void require_unit(double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw DomainError(std::string(field) + ": must be in [0,1], got " + std::to_string(v));
}

void require_nonnegative(double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0)
        throw DomainError(std::string(field) + ": must be finite and >= 0, got " +
                          std::to_string(v));
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void validate(const RelianceConfig& config) {
    require_unit(config.gamma, "gamma");
    require_unit(config.alpha, "alpha");
    require_nonnegative(config.c, "c");
    require_unit(config.r_hat, "r_hat");
    require_unit(config.r_init, "r_init");
    require_unit(config.theta_m, "theta_m");
    require_unit(config.theta_h, "theta_h");
    require_nonnegative(config.weights.self_confidence, "w_c");
    require_nonnegative(config.weights.risk, "w_k");
    require_nonnegative(config.weights.complexity, "w_o");
    require_nonnegative(config.weights.time_sensitivity, "w_s");
}

void validate(const TaskProfile& profile) {
    require_unit(profile.self_confidence, "self_confidence");
    require_nonnegative(profile.risk, "risk");
    require_nonnegative(profile.complexity, "complexity");
    require_nonnegative(profile.time_sensitivity, "time_sensitivity");
}

double self_confidence_term(double confidence, double weight) {
    require_unit(confidence, "self_confidence");
    require_nonnegative(weight, "w_c");
    return -weight * confidence;
}

double task_risk_term(double risk, double weight) {
    require_nonnegative(risk, "risk");
    require_nonnegative(weight, "w_k");
    return weight * std::exp(-risk);
}

double task_complexity_term(double complexity, double weight) {
    require_nonnegative(complexity, "complexity");
    require_nonnegative(weight, "w_o");
    return weight * complexity * complexity;
}

double time_sensitivity_term(double sensitivity, double weight) {
    require_nonnegative(sensitivity, "time_sensitivity");
    require_nonnegative(weight, "w_s");
    return weight * sensitivity;
}

double model_irrelevant_factor(const TaskProfile& profile, const FactorWeights& weights) {
    return self_confidence_term(profile.self_confidence, weights.self_confidence) +
           task_risk_term(profile.risk, weights.risk) +
           task_complexity_term(profile.complexity, weights.complexity) +
           time_sensitivity_term(profile.time_sensitivity, weights.time_sensitivity);
}

double performance_feedback(const FeedbackScore& score, double c) {
    require_unit(score.d, "d");
    require_nonnegative(c, "c");
    return c * score.d;
}

double instantaneous_reliance(double feedback, double irrelevant, double gamma, bool clamp) {
    require_unit(gamma, "gamma");
    if (!std::isfinite(feedback) || !std::isfinite(irrelevant))
        throw DomainError("reliance inputs must be finite");
    const double r = gamma * feedback + (1.0 - gamma) * irrelevant;
    return clamp ? clamp_unit(r) : r;
}

RelianceState smoothed_reliance(const RelianceState& prev, double r_new, double alpha, bool clamp) {
    require_unit(alpha, "alpha");
    if (!std::isfinite(r_new)) throw DomainError("r_new: must be finite");
    const double s = alpha * prev.smoothed + (1.0 - alpha) * r_new;
    return {clamp ? clamp_unit(s) : s, prev.task_index + 1};
}

bool trust_decision(const RelianceState& state, double r_hat, TieBreak tie_break) {
    if (std::abs(state.smoothed - r_hat) <= kTieTolerance) return tie_break == TieBreak::TrustOnEqual;
    return state.smoothed > r_hat;
}

std::string_view to_string(TieBreak v) {
    return v == TieBreak::TrustOnEqual ? "trust_on_equal" : "distrust_on_equal";
}

std::string_view to_string(FeedbackPolicy v) {
    switch (v) {
        case FeedbackPolicy::AttackConditioned: return "attack_conditioned";
        case FeedbackPolicy::CorrectnessConditioned: return "correctness_conditioned";
        case FeedbackPolicy::TrustConditioned: return "trust_conditioned";
    }
    return "?";
}

std::string_view to_string(FallbackPolicy v) {
    switch (v) {
        case FallbackPolicy::EqualsExecutedModel: return "equals_executed_model";
        case FallbackPolicy::FixedCorrect: return "fixed_correct";
        case FallbackPolicy::FixedWrong: return "fixed_wrong";
    }
    return "?";
}

std::string_view to_string(AssessmentMode v) {
    return v == AssessmentMode::FollowsTrust ? "follows_trust" : "thresholded";
}

}  // namespace reliance
