#include "prpo/reward_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prpo/error.hpp"

namespace prpo {

namespace {

int sgn(double x)
{
    if (x > 0.0)
        return 1;
    if (x < 0.0)
        return -1;
    return 0;
}

double l1_median(double a, double b, double c)
{
    const double candidates[3] = {a, b, c};
    double best = candidates[0];
    double best_cost = std::numeric_limits<double>::infinity();
    for (double xi : candidates) {
        const double cost = std::abs(a - xi) + std::abs(b - xi) + std::abs(c - xi);
        if (cost < best_cost) {
            best_cost = cost;
            best = xi;
        }
    }
    return best;
}

double gen_mean(const Generation& g)
{
    double s = 0.0;
    for (std::size_t d = 0; d < g.scores->size(); ++d)
        s += (*g.scores)[d];
    return s / static_cast<double>(g.scores->size());
}

// Count of valid generations ordered before `g`: lower mean, or equal mean and lower index.
std::size_t rank_by_count(const SampleGroup& s, std::size_t g)
{
    const double mine = gen_mean(s.generations[g]);
    std::size_t r = 0;
    for (std::size_t h = 0; h < s.generations.size(); ++h) {
        if (h == g || !s.generations[h].format_valid)
            continue;
        const double other = gen_mean(s.generations[h]);
        if (other < mine || (other == mine && h < g))
            ++r;
    }
    return r;
}

// Mean score of the generation holding rank `r` in sample `s`, or NaN if none.
double mean_at_rank(const SampleGroup& s, std::size_t r)
{
    for (std::size_t h = 0; h < s.generations.size(); ++h)
        if (s.generations[h].format_valid && rank_by_count(s, h) == r)
            return gen_mean(s.generations[h]);
    return std::numeric_limits<double>::quiet_NaN();
}

int consistent(double s_a, double s_b, double g_a, double g_b)
{
    return sgn(s_a - s_b) == sgn(g_a - g_b) ? 1 : 0;
}

}  // namespace

std::vector<std::vector<RewardBreakdown>> oracle_rewards(std::span<const SampleGroup> groups, const RunConfig& cfg,
                                                         Stage stage, std::size_t dims)
{
    const std::size_t b = groups.size();
    std::vector<std::vector<RewardBreakdown>> out(b);

    std::vector<bool> rankable(b, false);
    std::size_t rankable_count = 0;
    for (std::size_t j = 0; j < b; ++j) {
        for (const auto& g : groups[j].generations)
            rankable[j] = rankable[j] || g.format_valid;
        rankable_count += rankable[j] ? 1 : 0;
    }

    for (std::size_t l = 0; l < b; ++l) {
        const auto& s = groups[l];
        const std::size_t k = s.generations.size();
        out[l].resize(k);

        std::size_t valid = 0;
        for (const auto& g : s.generations)
            valid += g.format_valid ? 1 : 0;

        for (std::size_t i = 0; i < k; ++i) {
            RewardBreakdown& r = out[l][i];
            const auto& gen = s.generations[i];
            if (!gen.format_valid)
                continue;
            r.r_format = 1.0;

            if (valid >= 3) {
                double dim_sum = 0.0;
                for (std::size_t d = 0; d < dims; ++d) {
                    double acc = 0.0;
                    std::size_t count = 0;
                    for (std::size_t m = 0; m < k; ++m) {
                        for (std::size_t n = m + 1; n < k; ++n) {
                            if (m == i || n == i || !s.generations[m].format_valid || !s.generations[n].format_valid)
                                continue;
                            const double a = (*gen.scores)[d];
                            const double xi = l1_median(a, (*s.generations[m].scores)[d], (*s.generations[n].scores)[d]);
                            acc += std::exp(-cfg.gamma * std::abs(a - xi));
                            ++count;
                        }
                    }
                    dim_sum += acc / static_cast<double>(count);
                }
                r.r_loc = dim_sum / static_cast<double>(dims);
            }

            if (stage == Stage::Explore) {
                const double mu = gen_mean(gen);
                double ss = 0.0;
                for (std::size_t d = 0; d < dims; ++d)
                    ss += ((*gen.scores)[d] - mu) * ((*gen.scores)[d] - mu);
                const double sigma = std::sqrt(ss / static_cast<double>(dims));
                r.r_std_penalty = sigma < cfg.delta_min ? cfg.lambda_std * (cfg.delta_min - sigma) : 0.0;
            }

            if (rankable_count >= 2) {
                const std::size_t rank = rank_by_count(s, i);
                const double s_l = gen_mean(gen);
                const double g_l = s.mos;

                double pair_sum = 0.0;
                std::size_t pair_count = 0;
                for (std::size_t m = 0; m < b; ++m) {
                    if (m == l || !rankable[m])
                        continue;
                    const double s_m = mean_at_rank(groups[m], rank);
                    if (std::isnan(s_m))
                        continue;
                    const double g_m = groups[m].mos;
                    const int c = consistent(s_l, s_m, g_l, g_m);
                    const double mag = std::abs(g_l - g_m) /
                                       (std::abs(s_l - s_m) + std::abs(s_l - g_l) + std::abs(s_m - g_m) + cfg.pair_eps);
                    pair_sum += c == 1 ? std::exp(0.5 * mag) : std::exp(-0.5 * (1.0 + mag));
                    ++pair_count;
                }
                r.r_pair = pair_count ? pair_sum / static_cast<double>(pair_count) : 0.0;

                double tri_sum = 0.0;
                std::size_t tri_count = 0;
                for (std::size_t m = 0; m < b && rankable_count >= 3; ++m) {
                    for (std::size_t n = m + 1; n < b; ++n) {
                        if (m == l || n == l || !rankable[m] || !rankable[n])
                            continue;
                        const double s_m = mean_at_rank(groups[m], rank);
                        const double s_n = mean_at_rank(groups[n], rank);
                        if (std::isnan(s_m) || std::isnan(s_n))
                            continue;
                        const int total = consistent(s_l, s_m, g_l, groups[m].mos) +
                                          consistent(s_l, s_n, g_l, groups[n].mos) +
                                          consistent(s_m, s_n, groups[m].mos, groups[n].mos);
                        tri_sum += total == 3 ? 1.0 : 0.3;
                        ++tri_count;
                    }
                }
                r.r_tri = tri_count ? tri_sum / static_cast<double>(tri_count) : 0.0;
            }

            r.r_total = r.r_format + cfg.alpha * r.r_loc + (1.0 - cfg.alpha) * (cfg.beta1 * r.r_pair + cfg.beta2 * r.r_tri) -
                        r.r_std_penalty;
        }

        if (k == 0)
            continue;
        double mu = 0.0;
        for (const auto& r : out[l])
            mu += r.r_total;
        mu /= static_cast<double>(k);
        double var = 0.0;
        bool all_equal = true;
        for (const auto& r : out[l]) {
            var += (r.r_total - mu) * (r.r_total - mu);
            all_equal = all_equal && r.r_total == out[l][0].r_total;
        }
        const double sigma = std::sqrt(var / static_cast<double>(k));
        for (auto& r : out[l])
            r.advantage = (!all_equal && sigma > cfg.adv_eps) ? (r.r_total - mu) / sigma : 0.0;
    }
    return out;
}

double max_abs_difference(const std::vector<std::vector<RewardBreakdown>>& a,
                          const std::vector<std::vector<RewardBreakdown>>& b)
{
    if (a.size() != b.size())
        throw Error(ErrorCode::ShapeMismatch, "reward tables differ in sample count");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].size() != b[j].size())
            throw Error(ErrorCode::ShapeMismatch, "reward tables differ in generation count");
        for (std::size_t i = 0; i < a[j].size(); ++i) {
            const auto& x = a[j][i];
            const auto& y = b[j][i];
            for (double d : {x.r_format - y.r_format, x.r_loc - y.r_loc, x.r_pair - y.r_pair, x.r_tri - y.r_tri,
                             x.r_std_penalty - y.r_std_penalty, x.r_total - y.r_total, x.advantage - y.advantage})
                worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

}  // namespace prpo
