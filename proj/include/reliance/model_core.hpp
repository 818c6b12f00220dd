#pragma once

// Reliance dynamics: model-irrelevant factors, performance feedback,
// instantaneous and momentum-smoothed reliance, and the trust gate.
// Everything here is a pure function of its arguments.

#include <cstdint>
#include <string_view>

namespace reliance {

enum class TieBreak { TrustOnEqual, DistrustOnEqual };

/// Which fact selects the low evaluation score for a task.
enum class FeedbackPolicy {
    AttackConditioned,       // d_low on attacked tasks
    CorrectnessConditioned,  // d_low when the executed prediction is wrong
    TrustConditioned,        // d_low whenever the model was not trusted
};

enum class FallbackPolicy { EqualsExecutedModel, FixedCorrect, FixedWrong };

/// FollowsTrust: assessment passes iff the model is trusted (case-study regime).
/// Thresholded: the score is compared with theta_m / theta_h.
enum class AssessmentMode { FollowsTrust, Thresholded };

struct FactorWeights {
    double self_confidence = 0.0;   // w_c
    double risk = 0.0;              // w_k
    double complexity = 0.0;        // w_o
    double time_sensitivity = 0.0;  // w_s
};

struct RelianceConfig {
    double gamma = 1.0;
    double alpha = 0.8;
    double c = 1.0;
    double r_hat = 0.7;
    double r_init = 0.8;
    double theta_m = 0.5;
    double theta_h = 0.5;
    FactorWeights weights{};
    TieBreak tie_break = TieBreak::DistrustOnEqual;
    bool clamp_reliance = true;
    FeedbackPolicy feedback_policy = FeedbackPolicy::AttackConditioned;
    FallbackPolicy fallback_policy = FallbackPolicy::EqualsExecutedModel;
    AssessmentMode assessment_mode = AssessmentMode::FollowsTrust;
};

/// Throws DomainError naming the first offending field.
void validate(const RelianceConfig& config);

struct TaskProfile {
    double self_confidence = 0.0;   // c_i in [0,1]
    double risk = 0.0;              // k_i >= 0
    double complexity = 0.0;        // o_i >= 0
    double time_sensitivity = 0.0;  // s_i >= 0
};

void validate(const TaskProfile& profile);

struct RelianceState {
    double smoothed = 0.0;
    int task_index = 1;
};

enum class FeedbackKind { ModelOnly, HumanModel };

struct FeedbackScore {
    double d = 0.0;
    FeedbackKind kind = FeedbackKind::ModelOnly;
};

/// Scores closer than this to r_hat are treated as equal and resolved by the tie-break.
inline constexpr double kTieTolerance = 1e-12;

double self_confidence_term(double confidence, double weight);
double task_risk_term(double risk, double weight);
double task_complexity_term(double complexity, double weight);
double time_sensitivity_term(double sensitivity, double weight);

/// I_i: sum of the four factor terms.
double model_irrelevant_factor(const TaskProfile& profile, const FactorWeights& weights);

/// D_i = c * d. Model-only and human-model scores share the form.
double performance_feedback(const FeedbackScore& score, double c);

/// r_i = gamma * D_i + (1 - gamma) * I_i, clamped to [0,1] when requested.
double instantaneous_reliance(double feedback, double irrelevant, double gamma, bool clamp);

/// r*_{i+1} = alpha * r*_i + (1 - alpha) * r_{i+1}.
RelianceState smoothed_reliance(const RelianceState& prev, double r_new, double alpha, bool clamp);

bool trust_decision(const RelianceState& state, double r_hat, TieBreak tie_break);

std::string_view to_string(TieBreak v);
std::string_view to_string(FeedbackPolicy v);
std::string_view to_string(FallbackPolicy v);
std::string_view to_string(AssessmentMode v);

}  // namespace reliance
