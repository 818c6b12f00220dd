#include "reliance/io.hpp"

#include <fstream>
#include <system_error>
#include <unistd.h>

#include <fmt/format.h>

namespace reliance {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += fmt::format(".tmp{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot rename into " + path.string());
    }
}

void append_trace_rows(std::string& out, std::size_t episode_id, const DecisionTrace& trace) {
    for (const auto& t : trace.tasks) {
        fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{},{},{},{}\n", episode_id,
                       t.task_index, t.attacked ? 1 : 0, format_double(t.reliance_before),
                       t.trusted ? 1 : 0, t.assessment_passed ? 1 : 0, to_string(t.executed),
                       t.executed_correct ? 1 : 0, format_double(t.attack_score),
                       format_double(t.feedback), format_double(t.reliance_after));
    }
}

void append_strategy_row(std::string& out, const AttackVector& mask, const DistributionStats& stats,
                         std::size_t replications) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", mask.code(),
                   mask.to_string(), mask.budget(), format_double(stats.mean),
                   format_double(stats.std), format_double(stats.max), format_double(stats.min),
                   replications);
}

void append_sweep_row(std::string& out, const SweepRow& row) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", to_string(row.parameter),
                   row.value.label(row.parameter), row.n_attacks, format_double(row.mean_as),
                   format_double(row.std_as), format_double(row.max_as), row.best_mask.to_string(),
                   row.n_samples);
}

}  // namespace reliance
