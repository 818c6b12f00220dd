#pragma once

// One episode of n sequential human-AI decisions: trust gate, performance
// assessment, the four-scenario prediction resolution, attack-score
// accounting and the reliance feedback loop.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reliance/model_core.hpp"

namespace reliance {

/// Binary attack timing plan a = (a_1 ... a_n).
class AttackVector {
public:
    AttackVector() = default;
    explicit AttackVector(std::size_t n) : bits_(n, 0) {}
    explicit AttackVector(std::vector<std::uint8_t> bits);

    /// Parses a '0'/'1' string. Throws DomainError naming the bad character.
    static AttackVector parse(std::string_view text);

    std::size_t size() const noexcept { return bits_.size(); }
    bool attacked(std::size_t i) const { return bits_.at(i) != 0; }
    void set(std::size_t i, bool value) { bits_.at(i) = value ? 1 : 0; }
    std::size_t budget() const noexcept;

    /// Mask read as a binary number, task 1 most significant. Requires n <= 64.
    std::uint64_t code() const;

    std::string to_string() const;
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    friend bool operator==(const AttackVector&, const AttackVector&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// One task's stochastic realization.
struct TaskOutcome {
    bool model_correct = true;
    bool human_correct = true;
    bool attacked_correct = false;
    double d_low = 0.0;
    double d_high = 1.0;
};

struct WorldSample {
    std::vector<TaskOutcome> tasks;
    std::size_t size() const noexcept { return tasks.size(); }
};

enum class Executed { Model, AttackedModel, Human, Fallback };

enum class LossKind { ZeroOne, Absolute };
enum class Aggregation { Mean, Product };

struct LossSpec {
    LossKind kind = LossKind::ZeroOne;
    Aggregation aggregation = Aggregation::Mean;
};

struct TaskRecord {
    int task_index = 1;
    bool attacked = false;
    double reliance_before = 0.0;
    bool trusted = false;
    bool assessment_passed = false;
    Executed executed = Executed::Human;
    bool executed_correct = false;
    double attack_score = 0.0;  // AS_i
    double feedback = 0.0;      // d_i
    double reliance_after = 0.0;
};

struct DecisionTrace {
    std::vector<TaskRecord> tasks;
    double attack_score = 0.0;  // aggregated AS
};

struct Resolution {
    Executed executed = Executed::Human;
    bool correct = false;
};

/// Maps (trusted, assessment_passed, attacked) to the executed prediction.
/// `task` is 0-based; throws DomainError when out of range.
Resolution resolve_prediction(bool trusted, bool assessment_passed, bool attacked,
                              const WorldSample& world, std::size_t task,
                              FallbackPolicy fallback);

/// Picks d_low or d_high of task `task` according to the policy.
FeedbackScore generate_feedback(FeedbackPolicy policy, bool trusted, bool attacked,
                                bool executed_correct, const WorldSample& world,
                                std::size_t task);

double per_task_attack_score(bool executed_correct, const LossSpec& loss);

/// Absolute discrepancy |y - y'| for scalar-valued predictions.
double absolute_loss(double truth, double prediction);

/// Throws DomainError on an empty sequence.
double aggregate_attack_score(std::span<const double> scores, const LossSpec& loss);

/// Profiles must have length n (or length 1, broadcast to every task).
DecisionTrace run_episode(const RelianceConfig& config, std::span<const TaskProfile> profiles,
                          const AttackVector& attack, const WorldSample& world,
                          const LossSpec& loss);

std::string_view to_string(Executed v);
std::string_view to_string(LossKind v);
std::string_view to_string(Aggregation v);

}  // namespace reliance
