#pragma once

// Random generators and independent reference implementations shared by the
// unit and acceptance tests. Nothing here calls into the library's numeric code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "prpo/qa_types.hpp"

namespace prpo::test {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double normal(double mu = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mu, sd)(engine_); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }

    // A score in [1, 5]; on a coarse grid half of the time so ties show up.
    double score()
    {
        if (chance(0.5))
            return 1.0 + 0.5 * integer(0, 8);
        return uniform(1.0, 5.0);
    }

    std::vector<double> scores(std::size_t n)
    {
        std::vector<double> v(n);
        for (auto& x : v)
            x = score();
        return v;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline Generation gen_of(const std::vector<double>& scores, double logp = 0.0)
{
    return Generation::valid(ScoreVector::validate(scores, scores.size()), logp);
}

// Random minibatch: up to `max_b` samples, up to `max_k` generations each,
// roughly one in six generations malformed.
inline std::vector<SampleGroup> random_batch(Rng& rng, int max_b, int max_k, std::size_t dims)
{
    const int b = rng.integer(1, max_b);
    std::vector<SampleGroup> groups;
    for (int j = 0; j < b; ++j) {
        const int k = rng.integer(1, max_k);
        std::vector<Generation> gens;
        for (int i = 0; i < k; ++i) {
            if (rng.chance(1.0 / 6.0))
                gens.push_back(Generation::malformed(std::nullopt));
            else
                gens.push_back(gen_of(rng.scores(dims)));
        }
        groups.push_back(make_sample_group("s" + std::to_string(j), rng.score(), {}, std::move(gens)));
    }
    return groups;
}

// ---------------------------------------------------------------------------
// Reward stack reference, written from the definitions with plain loops.

inline double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double median3(double a, double b, double c)
{
    double v[3] = {a, b, c};
    std::sort(v, v + 3);
    return v[1];
}

inline int sign3(double x)
{
    return (x > 0.0) - (x < 0.0);
}

struct RefGeneration {
    bool valid = false;
    std::vector<double> s;
};

struct RefReward {
    double format = 0, loc = 0, pair = 0, tri = 0, penalty = 0, total = 0, adv = 0;
};

inline std::vector<std::vector<RefReward>> reference_rewards(const std::vector<SampleGroup>& groups,
                                                             const RunConfig& cfg, Stage stage, std::size_t dims)
{
    const std::size_t b = groups.size();
    std::vector<std::vector<RefGeneration>> g(b);
    for (std::size_t j = 0; j < b; ++j)
        for (const auto& gen : groups[j].generations) {
            RefGeneration r;
            r.valid = gen.format_valid;
            if (r.valid)
                r.s.assign(gen.scores->values().begin(), gen.scores->values().end());
            g[j].push_back(r);
        }

    // Sorted list of (mean, index) of the valid generations of each sample.
    std::vector<std::vector<std::pair<double, std::size_t>>> sorted(b);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t i = 0; i < g[j].size(); ++i)
            if (g[j][i].valid)
                sorted[j].push_back({mean_of(g[j][i].s), i});
        std::sort(sorted[j].begin(), sorted[j].end());
    }

    std::vector<std::vector<RefReward>> out(b);
    for (std::size_t l = 0; l < b; ++l) {
        const std::size_t k = g[l].size();
        out[l].resize(k);
        std::vector<std::size_t> valid;
        for (std::size_t i = 0; i < k; ++i)
            if (g[l][i].valid)
                valid.push_back(i);

        for (std::size_t rank = 0; rank < sorted[l].size(); ++rank) {
            const std::size_t i = sorted[l][rank].second;
            RefReward& r = out[l][i];
            const auto& s = g[l][i].s;
            r.format = 1.0;

            if (valid.size() >= 3) {
                double acc_dims = 0.0;
                for (std::size_t d = 0; d < dims; ++d) {
                    std::vector<double> terms;
                    for (std::size_t x = 0; x < valid.size(); ++x)
                        for (std::size_t y = x + 1; y < valid.size(); ++y)
                            for (std::size_t z = y + 1; z < valid.size(); ++z) {
                                const std::size_t t[3] = {valid[x], valid[y], valid[z]};
                                if (t[0] != i && t[1] != i && t[2] != i)
                                    continue;
                                const double xi = median3(g[l][t[0]].s[d], g[l][t[1]].s[d], g[l][t[2]].s[d]);
                                terms.push_back(std::exp(-cfg.gamma * std::fabs(s[d] - xi)));
                            }
                    acc_dims += mean_of(terms);
                }
                r.loc = acc_dims / static_cast<double>(dims);
            }

            if (stage == Stage::Explore) {
                const double mu = mean_of(s);
                double var = 0.0;
                for (double x : s)
                    var += (x - mu) * (x - mu);
                const double sd = std::sqrt(var / static_cast<double>(s.size()));
                r.penalty = sd < cfg.delta_min ? cfg.lambda_std * (cfg.delta_min - sd) : 0.0;
            }

            const double s_l = sorted[l][rank].first;
            const double g_l = groups[l].mos;
            auto consistent = [](double sa, double sb, double ga, double gb) {
                return sign3(sa - sb) == sign3(ga - gb) ? 1.0 : 0.0;
            };
            std::vector<double> pair_terms;
            for (std::size_t m = 0; m < b; ++m) {
                if (m == l || rank >= sorted[m].size())
                    continue;
                const double s_m = sorted[m][rank].first;
                const double g_m = groups[m].mos;
                const double c = consistent(s_l, s_m, g_l, g_m);
                const double mag = std::fabs(g_l - g_m) / (std::fabs(s_l - s_m) + std::fabs(s_l - g_l) +
                                                          std::fabs(s_m - g_m) + cfg.pair_eps);
                pair_terms.push_back(std::sqrt(c * std::exp(mag)) + std::sqrt((1.0 - c) * std::exp(-(1.0 + mag))));
            }
            r.pair = pair_terms.empty() ? 0.0 : mean_of(pair_terms);

            std::vector<double> tri_terms;
            for (std::size_t m = 0; m < b; ++m)
                for (std::size_t n = m + 1; n < b; ++n) {
                    if (m == l || n == l || rank >= sorted[m].size() || rank >= sorted[n].size())
                        continue;
                    const double s_m = sorted[m][rank].first, s_n = sorted[n][rank].first;
                    const double sum = consistent(s_l, s_m, g_l, groups[m].mos) +
                                       consistent(s_l, s_n, g_l, groups[n].mos) +
                                       consistent(s_m, s_n, groups[m].mos, groups[n].mos);
                    tri_terms.push_back(sum == 3.0 ? 1.0 : 0.3);
                }
            r.tri = tri_terms.empty() ? 0.0 : mean_of(tri_terms);

            r.total = r.format + cfg.alpha * r.loc + (1.0 - cfg.alpha) * (cfg.beta1 * r.pair + cfg.beta2 * r.tri) -
                      r.penalty;
        }

        if (k == 0)
            continue;
        std::vector<double> totals;
        for (const auto& r : out[l])
            totals.push_back(r.total);
        const double mu = mean_of(totals);
        double var = 0.0;
        for (double t : totals)
            var += (t - mu) * (t - mu);
        const double sd = std::sqrt(var / static_cast<double>(k));
        const bool constant = std::all_of(totals.begin(), totals.end(), [&](double t) { return t == totals[0]; });
        for (auto& r : out[l])
            r.adv = (constant || sd <= cfg.adv_eps) ? 0.0 : (r.total - mu) / sd;
    }
    return out;
}

inline double max_reference_gap(const std::vector<std::vector<RewardBreakdown>>& got,
                                const std::vector<std::vector<RefReward>>& want)
{
    if (got.size() != want.size())
        return INFINITY;
    double worst = 0.0;
    for (std::size_t j = 0; j < got.size(); ++j) {
        if (got[j].size() != want[j].size())
            return INFINITY;
        for (std::size_t i = 0; i < got[j].size(); ++i) {
            const auto& a = got[j][i];
            const auto& e = want[j][i];
            for (double d : {a.r_format - e.format, a.r_loc - e.loc, a.r_pair - e.pair, a.r_tri - e.tri,
                             a.r_std_penalty - e.penalty, a.r_total - e.total, a.advantage - e.adv})
                worst = std::max(worst, std::fabs(d));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Correlation reference: ranks by counting, Pearson from the textbook formula.

inline std::vector<double> counted_ranks(const std::vector<double>& v)
{
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double x : v) {
            less += x < v[i];
            equal += x == v[i];
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

inline double pearson_reference(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

inline double spearman_reference(const std::vector<double>& x, const std::vector<double>& y)
{
    return pearson_reference(counted_ranks(x), counted_ranks(y));
}

// ---------------------------------------------------------------------------
// Density of s = 1 + 4 / (1 + e^-u) when u ~ N(mu, sigma^2), by change of variables.

inline double squashed_gaussian_log_density(double u, double mu, double sigma)
{
    const double pdf_u = std::exp(-0.5 * ((u - mu) / sigma) * ((u - mu) / sigma)) /
                         (sigma * std::sqrt(2.0 * std::numbers::pi));
    // ds/du = 4 sig(u) sig(-u)
    const double ds_du = 4.0 / (1.0 + std::exp(-u)) / (1.0 + std::exp(u));
    return std::log(pdf_u / ds_du);
}

}  // namespace prpo::test
