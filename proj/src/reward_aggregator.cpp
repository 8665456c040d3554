#include "prpo/reward_aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prpo/error.hpp"
#include "prpo/preference_reward.hpp"
#include "prpo/response_reward.hpp"

namespace prpo {

RewardBreakdown total_reward(const RewardComponents& c, const RunConfig& cfg, Stage stage)
{
    RewardBreakdown out;
    out.r_format = c.r_format;
    out.r_loc = c.r_loc;
    out.r_pair = c.r_pair;
    out.r_tri = c.r_tri;
    out.r_std_penalty = stage == Stage::Explore ? c.r_std_penalty : 0.0;
    out.r_total = c.r_format + cfg.alpha * c.r_loc + (1.0 - cfg.alpha) * (cfg.beta1 * c.r_pair + cfg.beta2 * c.r_tri) -
                  out.r_std_penalty;
    return out;
}

AdvantageGroup group_advantages(std::span<const double> rewards, double adv_eps)
{
    if (rewards.empty())
        throw Error(ErrorCode::BadArgument, "empty reward group");
    AdvantageGroup g;
    g.rewards.assign(rewards.begin(), rewards.end());
    const double k = static_cast<double>(rewards.size());
    // Two-pass mean: the residual of the first pass is folded back in so that
    // tightly clustered groups still centre to within rounding of zero.
    const double rough = std::accumulate(rewards.begin(), rewards.end(), 0.0) / k;
    std::vector<double> dev(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i)
        dev[i] = rewards[i] - rough;
    const double residual = std::accumulate(dev.begin(), dev.end(), 0.0) / k;
    g.mean = rough + residual;
    double ss = 0.0;
    for (auto& d : dev) {
        d -= residual;
        ss += d * d;
    }
    g.std = std::sqrt(ss / k);

    g.advantages.assign(rewards.size(), 0.0);
    const bool constant = std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
    if (constant || !(g.std > adv_eps))
        return g;
    for (std::size_t i = 0; i < rewards.size(); ++i)
        g.advantages[i] = dev[i] / g.std;
    return g;
}

std::vector<std::vector<RewardBreakdown>> score_batch(std::span<const SampleGroup> groups, const RunConfig& cfg,
                                                      Stage stage, std::size_t dims)
{
    const std::size_t b = groups.size();
    std::vector<std::vector<RewardComponents>> parts(b);

    // Samples without any valid generation cannot be ranked and drop out of the
    // preference comparisons.
    std::vector<std::size_t> rankable;
    for (std::size_t j = 0; j < b; ++j) {
        const auto& group = groups[j];
        parts[j].resize(group.generations.size());
        const bool local_ok = group.valid_count() >= 3;
        for (std::size_t i = 0; i < group.generations.size(); ++i) {
            const auto& gen = group.generations[i];
            if (!gen.format_valid)
                continue;
            if (gen.scores->size() != dims)
                throw Error(ErrorCode::ShapeMismatch, "sample '" + group.sample_id + "' generation " +
                                                          std::to_string(i) + " has " +
                                                          std::to_string(gen.scores->size()) + " dims, expected " +
                                                          std::to_string(dims));
            auto& p = parts[j][i];
            p.r_format = 1.0;
            p.r_loc = local_ok ? response_reward(group, i, cfg.gamma, dims) : 0.0;
            p.r_std_penalty = std_penalty(*gen.scores, cfg.delta_min, cfg.lambda_std);
        }
        if (group.valid_count() > 0)
            rankable.push_back(j);
    }

    if (rankable.size() >= 2) {
        std::vector<SampleGroup> subset;
        std::vector<double> ground;
        subset.reserve(rankable.size());
        for (auto j : rankable) {
            subset.push_back(groups[j]);
            ground.push_back(groups[j].mos);
        }
        const auto batch = RankedBatch::build(subset);
        const auto pref = preference_rewards(batch, ground, cfg.pair_eps);
        for (std::size_t x = 0; x < rankable.size(); ++x) {
            const auto j = rankable[x];
            for (std::size_t i = 0; i < groups[j].generations.size(); ++i) {
                parts[j][i].r_pair = pref[x][i].r_pair;
                parts[j][i].r_tri = pref[x][i].r_tri;
            }
        }
    }

    std::vector<std::vector<RewardBreakdown>> out(b);
    for (std::size_t j = 0; j < b; ++j) {
        std::vector<double> totals;
        totals.reserve(parts[j].size());
        for (const auto& p : parts[j]) {
            out[j].push_back(total_reward(p, cfg, stage));
            totals.push_back(out[j].back().r_total);
        }
        if (totals.empty())
            continue;
        const auto adv = group_advantages(totals, cfg.adv_eps);
        for (std::size_t i = 0; i < totals.size(); ++i)
            out[j][i].advantage = adv.advantages[i];
    }
    return out;
}

}  // namespace prpo
