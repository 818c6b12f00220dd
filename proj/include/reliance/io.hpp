#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "reliance/montecarlo.hpp"
#include "reliance/pipeline.hpp"

namespace reliance {

/// 17 significant digits: round-trips every double.
std::string format_double(double v);

/// Writes to a sibling temporary then renames, so readers never see a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

inline constexpr std::string_view kTraceHeader =
    "episode_id,task_index,attacked,reliance_before,trusted,assessment_passed,executed,"
    "executed_correct,as_i,d_i,reliance_after";
inline constexpr std::string_view kStrategyHeader =
    "strategy_id,mask,n_attacks,as_mean,as_std,as_max,as_min,n_replications";
inline constexpr std::string_view kSweepHeader =
    "parameter,value,n_attacks,mean_as,std_as,max_as,best_mask,n_samples";

/// Appends trace rows (no header).
void append_trace_rows(std::string& out, std::size_t episode_id, const DecisionTrace& trace);

/// `replications` is 0 for exact expected-loss rows.
void append_strategy_row(std::string& out, const AttackVector& mask, const DistributionStats& stats,
                         std::size_t replications);

void append_sweep_row(std::string& out, const SweepRow& row);

}  // namespace reliance
