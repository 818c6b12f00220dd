#pragma once

// Run configuration file: JSON with // comments. Every key is known; any
// unknown key or out-of-range value fails with a dotted field path.

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "reliance/montecarlo.hpp"

namespace reliance {

struct RunConfig {
    RelianceConfig reliance;
    StochasticSpec stochastic;
    FixedScores deterministic;
    LossSpec loss;
    std::vector<TaskProfile> profiles;  // length n after parsing

    std::size_t n() const { return stochastic.n; }

    /// Stochastic scenario, or the fixed-score regime when `deterministic`.
    Scenario scenario(bool deterministic) const;
};

/// Throws ConfigError ("field.path: message").
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON form (all fields, sorted keys).
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace reliance
