#include "prpo/preference_reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prpo/error.hpp"

namespace prpo {

namespace {

int sign(double x) noexcept
{
    return (x > 0.0) - (x < 0.0);
}

void check_ground(const RankedBatch& batch, std::span<const double> ground)
{
    if (ground.size() != batch.size())
        throw Error(ErrorCode::ShapeMismatch, "ground truth has " + std::to_string(ground.size()) +
                                                  " entries for a batch of " + std::to_string(batch.size()));
}

std::string rank_label(std::size_t sample, std::size_t rank)
{
    return "sample " + std::to_string(sample) + ", rank " + std::to_string(rank);
}

}  // namespace

std::vector<std::size_t> rank_generations(const SampleGroup& group)
{
    std::vector<std::size_t> order;
    std::vector<double> means(group.generations.size(), 0.0);
    for (std::size_t i = 0; i < group.generations.size(); ++i) {
        const auto& g = group.generations[i];
        if (!g.format_valid)
            continue;
        order.push_back(i);
        means[i] = g.scores->mean();
    }
    if (order.empty())
        throw Error(ErrorCode::NoValidGenerations, "sample '" + group.sample_id + "'");
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
    return order;
}

RankedBatch RankedBatch::build(std::span<const SampleGroup> samples)
{
    RankedBatch out;
    out.samples_.assign(samples.begin(), samples.end());
    for (const auto& s : out.samples_) {
        auto order = rank_generations(s);
        std::vector<double> means;
        std::vector<std::size_t> lookup(s.generations.size(), npos);
        means.reserve(order.size());
        for (std::size_t r = 0; r < order.size(); ++r) {
            means.push_back(s.generations[order[r]].scores->mean());
            lookup[order[r]] = r;
        }
        out.order_.push_back(std::move(order));
        out.means_.push_back(std::move(means));
        out.rank_lookup_.push_back(std::move(lookup));
    }
    return out;
}

double RankedBatch::ranked_mean(std::size_t j, std::size_t rank) const
{
    if (!has_rank(j, rank))
        throw Error(ErrorCode::RankUnavailable, rank_label(j, rank));
    return means_[j][rank];
}

std::size_t RankedBatch::rank_of(std::size_t j, std::size_t gen) const
{
    return rank_lookup_.at(j).at(gen);
}

std::vector<double> RankedBatch::mos() const
{
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_)
        out.push_back(s.mos);
    return out;
}

int pair_consistency(double s_l, double s_m, double g_l, double g_m) noexcept
{
    return sign(s_l - s_m) == sign(g_l - g_m) ? 1 : 0;
}

double magnitude_alignment(double s_l, double s_m, double g_l, double g_m, double eps) noexcept
{
    return std::abs(g_l - g_m) / (std::abs(s_l - s_m) + std::abs(s_l - g_l) + std::abs(s_m - g_m) + eps);
}

double pair_term(int consistency, double alignment) noexcept
{
    const double c = static_cast<double>(consistency);
    return std::sqrt(c * std::exp(alignment)) + std::sqrt((1.0 - c) * std::exp(-(1.0 + alignment)));
}

double pairwise_reward(const RankedBatch& batch, std::size_t sample_l, std::size_t rank,
                       std::span<const double> ground, double eps)
{
    if (batch.size() < 2)
        throw Error(ErrorCode::BatchTooSmall, "B=" + std::to_string(batch.size()));
    check_ground(batch, ground);
    const double s_l = batch.ranked_mean(sample_l, rank);

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < batch.size(); ++m) {
        if (m == sample_l || !batch.has_rank(m, rank))
            continue;
        const double s_m = batch.ranked_mean(m, rank);
        const int c = pair_consistency(s_l, s_m, ground[sample_l], ground[m]);
        const double mag = magnitude_alignment(s_l, s_m, ground[sample_l], ground[m], eps);
        sum += pair_term(c, mag);
        ++count;
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

double triplet_reward_single(int c_lm, int c_ln, int c_mn) noexcept
{
    return c_lm + c_ln + c_mn == 3 ? 1.0 : 0.3;
}

double triplet_reward(const RankedBatch& batch, std::size_t sample_j, std::size_t rank,
                      std::span<const double> ground)
{
    if (batch.size() < 3)
        throw Error(ErrorCode::BatchTooSmall, "B=" + std::to_string(batch.size()));
    check_ground(batch, ground);
    const double s_j = batch.ranked_mean(sample_j, rank);

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < batch.size(); ++m) {
        if (m == sample_j || !batch.has_rank(m, rank))
            continue;
        const double s_m = batch.ranked_mean(m, rank);
        for (std::size_t n = m + 1; n < batch.size(); ++n) {
            if (n == sample_j || !batch.has_rank(n, rank))
                continue;
            const double s_n = batch.ranked_mean(n, rank);
            sum += triplet_reward_single(pair_consistency(s_j, s_m, ground[sample_j], ground[m]),
                                         pair_consistency(s_j, s_n, ground[sample_j], ground[n]),
                                         pair_consistency(s_m, s_n, ground[m], ground[n]));
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<std::vector<PreferenceScores>> preference_rewards(const RankedBatch& batch,
                                                              std::span<const double> ground, double eps)
{
    if (batch.size() < 2)
        throw Error(ErrorCode::BatchTooSmall, "B=" + std::to_string(batch.size()));
    check_ground(batch, ground);

    const std::size_t b = batch.size();
    std::vector<std::vector<PreferenceScores>> out(b);
    std::size_t max_rank = 0;
    for (std::size_t j = 0; j < b; ++j) {
        out[j].resize(batch.sample(j).generations.size());
        max_rank = std::max(max_rank, batch.order(j).size());
    }

    // Consistency and alignment matrices are symmetric, so each rank level is
    // evaluated once over the samples that realize it.
    std::vector<int> consistency(b * b);
    std::vector<double> alignment(b * b);
    std::vector<std::size_t> present;
    for (std::size_t rank = 0; rank < max_rank; ++rank) {
        present.clear();
        for (std::size_t j = 0; j < b; ++j)
            if (batch.has_rank(j, rank))
                present.push_back(j);

        for (std::size_t x = 0; x < present.size(); ++x) {
            for (std::size_t y = x + 1; y < present.size(); ++y) {
                const auto l = present[x], m = present[y];
                const double s_l = batch.ranked_mean(l, rank), s_m = batch.ranked_mean(m, rank);
                const int c = pair_consistency(s_l, s_m, ground[l], ground[m]);
                const double mag = magnitude_alignment(s_l, s_m, ground[l], ground[m], eps);
                consistency[l * b + m] = consistency[m * b + l] = c;
                alignment[l * b + m] = alignment[m * b + l] = mag;
            }
        }

        for (const auto l : present) {
            PreferenceScores& slot = out[l][batch.order(l)[rank]];
            double pair_sum = 0.0;
            for (const auto m : present)
                if (m != l)
                    pair_sum += pair_term(consistency[l * b + m], alignment[l * b + m]);
            const std::size_t others = present.size() - 1;
            slot.r_pair = others ? pair_sum / static_cast<double>(others) : 0.0;

            if (b < 3)
                continue;
            double tri_sum = 0.0;
            std::size_t tri_count = 0;
            for (std::size_t x = 0; x < present.size(); ++x) {
                const auto m = present[x];
                if (m == l)
                    continue;
                for (std::size_t y = x + 1; y < present.size(); ++y) {
                    const auto n = present[y];
                    if (n == l)
                        continue;
                    tri_sum += triplet_reward_single(consistency[l * b + m], consistency[l * b + n],
                                                     consistency[m * b + n]);
                    ++tri_count;
                }
            }
            slot.r_tri = tri_count ? tri_sum / static_cast<double>(tri_count) : 0.0;
        }
    }
    return out;
}

}  // namespace prpo
