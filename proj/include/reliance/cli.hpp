#pragma once

// Command-line front end. Exit status: 0 success, 1 validation error,
// 2 runtime error.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reliance::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

enum class Format { Csv, Json };

struct CommandOutcome {
    int status = kOk;
    std::vector<std::filesystem::path> written;
};

struct SimulateOptions {
    std::filesystem::path config;
    std::string mask;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
    bool deterministic = false;
    std::size_t replications = 1;
    Format format = Format::Csv;
};

struct EnumerateOptions {
    std::filesystem::path config;
    std::vector<std::size_t> budgets;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
    bool deterministic = false;
    std::optional<std::size_t> replications;
    unsigned jobs = 1;
    Format format = Format::Csv;
};

struct AnalyticOptions {
    std::size_t n = 10;
    double e_h = 0.1;
    double e_m = 0.2;
    double e_a = 1.0;
    std::string family = "all";
    std::optional<int> recovery_k;
    std::optional<std::filesystem::path> config;  // recovery regime source
    std::optional<std::filesystem::path> out;
    Format format = Format::Csv;
};

struct SweepOptions {
    std::filesystem::path config;
    std::string param;
    std::optional<std::vector<std::string>> values;  // nullopt: default grid
    std::vector<std::size_t> budgets;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir;
    std::optional<std::size_t> replications;
    unsigned jobs = 1;
};

CommandOutcome cmd_simulate(const SimulateOptions& opts);
CommandOutcome cmd_enumerate(const EnumerateOptions& opts);
CommandOutcome cmd_analytic(const AnalyticOptions& opts);
CommandOutcome cmd_sweep(const SweepOptions& opts);

/// Full argv entry point; never throws.
int run(int argc, char** argv);

}  // namespace reliance::cli
