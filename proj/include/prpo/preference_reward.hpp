#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prpo/qa_types.hpp"

namespace prpo {

/// Format-valid generation indices of `group`, ordered by ascending mean score.
/// Ties keep the lower generation index first. Throws NoValidGenerations.
std::vector<std::size_t> rank_generations(const SampleGroup& group);

/// A minibatch with every sample's generations ranked by mean score. Row j of
/// the order statistics lists sample j's valid generations, lowest mean first.
class RankedBatch {
public:
    static RankedBatch build(std::span<const SampleGroup> samples);

    std::size_t size() const noexcept { return samples_.size(); }
    const SampleGroup& sample(std::size_t j) const { return samples_.at(j); }
    const std::vector<std::size_t>& order(std::size_t j) const { return order_.at(j); }

    bool has_rank(std::size_t j, std::size_t rank) const { return rank < order_.at(j).size(); }
    /// Mean score of sample j's rank-th order statistic. Throws RankUnavailable.
    double ranked_mean(std::size_t j, std::size_t rank) const;
    /// Rank of generation `gen` within sample j, or npos for malformed generations.
    std::size_t rank_of(std::size_t j, std::size_t gen) const;

    std::vector<double> mos() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<SampleGroup> samples_;
    std::vector<std::vector<std::size_t>> order_;
    std::vector<std::vector<double>> means_;
    std::vector<std::vector<std::size_t>> rank_lookup_;
};

/// 1 iff sign(s_l - s_m) == sign(g_l - g_m) with a three-valued sign.
int pair_consistency(double s_l, double s_m, double g_l, double g_m) noexcept;

/// |g_l - g_m| / (|s_l - s_m| + |s_l - g_l| + |s_m - g_m| + eps).
double magnitude_alignment(double s_l, double s_m, double g_l, double g_m, double eps) noexcept;

/// sqrt(C e^M) + sqrt((1 - C) e^-(1 + M)) for one comparison.
double pair_term(int consistency, double alignment) noexcept;

/// Mean of `pair_term` between sample l's rank-th order statistic and the same
/// rank of every other sample that has it. Zero when no comparison exists.
double pairwise_reward(const RankedBatch& batch, std::size_t sample_l, std::size_t rank,
                       std::span<const double> ground, double eps);

/// 1.0 when all three pairwise orderings agree with the ground truth, else 0.3.
double triplet_reward_single(int c_lm, int c_ln, int c_mn) noexcept;

/// Mean of `triplet_reward_single` over every unordered pair {m, n} of other
/// samples that have the rank-th order statistic. Throws BatchTooSmall if B < 3;
/// zero when no triplet is realizable.
double triplet_reward(const RankedBatch& batch, std::size_t sample_j, std::size_t rank,
                      std::span<const double> ground);

struct PreferenceScores {
    double r_pair = 0.0;
    double r_tri = 0.0;
};

/// Pairwise and triplet rewards for every generation of every sample, indexed
/// [sample][generation]. Malformed generations receive zeros; triplet rewards are
/// zero when the batch holds fewer than three samples.
std::vector<std::vector<PreferenceScores>> preference_rewards(const RankedBatch& batch,
                                                              std::span<const double> ground, double eps);

}  // namespace prpo
