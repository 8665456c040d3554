#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prpo/qa_types.hpp"

namespace prpo {

struct RewardComponents {
    double r_format = 0.0;
    double r_loc = 0.0;
    double r_pair = 0.0;
    double r_tri = 0.0;
    double r_std_penalty = 0.0;
};

/// r_format + alpha r_loc + (1 - alpha)(beta1 r_pair + beta2 r_tri) - penalty.
/// The std penalty only applies in the exploration stage; in the stabilization
/// stage the breakdown records a zero penalty.
RewardBreakdown total_reward(const RewardComponents& components, const RunConfig& cfg, Stage stage);

struct AdvantageGroup {
    std::vector<double> rewards;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> advantages;
};

/// Group-relative advantages (r - mean) / std with the population std. Groups
/// whose std does not exceed `adv_eps` (including constant groups) get zeros.
AdvantageGroup group_advantages(std::span<const double> rewards, double adv_eps);

/// Full reward stack for a minibatch: format, response-local, pairwise, triplet
/// and std-penalty components, totals and per-sample advantages. Result is
/// indexed [sample][generation]. `dims` is the score dimension count (5 or 2).
std::vector<std::vector<RewardBreakdown>> score_batch(std::span<const SampleGroup> groups, const RunConfig& cfg,
                                                      Stage stage, std::size_t dims);

}  // namespace prpo
