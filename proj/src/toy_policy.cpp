#include "prpo/toy_policy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "prpo/error.hpp"
#include "prpo/reward_aggregator.hpp"

namespace prpo {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // 0.5 * log(2 pi)

// Per-dimension offsets of the ground-truth map, zero mean across the five dims.
constexpr double kQualityOffsets[kIqaDims] = {0.5, -0.5, 0.3, 0.4, -0.7};

double softplus(double x) noexcept
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<double> unit_direction(std::size_t n, double freq, double phase)
{
    std::vector<double> v(n);
    double norm = 0.0;
    for (std::size_t f = 0; f < n; ++f) {
        v[f] = std::cos(freq * static_cast<double>(f + 1) + phase);
        norm += v[f] * v[f];
    }
    norm = std::sqrt(norm);
    for (auto& x : v)
        x /= norm;
    return v;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double population_std(std::span<const double> v)
{
    const double n = static_cast<double>(v.size());
    const double mu = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - mu) * (x - mu);
    return std::sqrt(ss / n);
}

}  // namespace

std::vector<double> ground_truth_quality(std::span<const double> features, std::size_t dims)
{
    if (dims == 0 || dims > kIqaDims)
        throw Error(ErrorCode::BadArgument, "dims must be in [1, 5]");
    const auto common = unit_direction(features.size(), 0.7, 0.3);
    std::vector<double> q(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        const auto own = unit_direction(features.size(), 1.9 * static_cast<double>(d + 1), 0.5);
        q[d] = 3.0 + 1.0 * dot(common, features) + 0.3 * dot(own, features) + kQualityOffsets[d];
    }
    return q;
}

SyntheticDataset generate_dataset(int n, int feature_dim, double noise, std::uint64_t seed, std::size_t dims)
{
    if (n < 2)
        throw Error(ErrorCode::BadArgument, "n must be >= 2");
    if (feature_dim < 1)
        throw Error(ErrorCode::BadArgument, "feature_dim must be >= 1");
    if (!(noise >= 0.0))
        throw Error(ErrorCode::BadArgument, "noise must be >= 0");

    SyntheticDataset ds;
    ds.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ds.samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        SyntheticSample s;
        char id[32];
        std::snprintf(id, sizeof id, "syn%04d", i);
        s.sample_id = id;
        s.features.resize(static_cast<std::size_t>(feature_dim));
        for (auto& f : s.features)
            f = normal(rng);
        s.quality = ground_truth_quality(s.features, dims);
        for (auto& q : s.quality)
            q = std::clamp(q + noise * normal(rng), kMinScore, kMaxScore);
        s.mos = std::accumulate(s.quality.begin(), s.quality.end(), 0.0) / static_cast<double>(dims);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

double squash(double u) noexcept
{
    // 1 + 4 / (1 + e^-u), written to stay exact at both tails.
    const double sig = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
    return kMinScore + (kMaxScore - kMinScore) * sig;
}

double log_squash_jacobian(double u) noexcept
{
    // log(4 sig(u) (1 - sig(u)))
    return std::log(kMaxScore - kMinScore) - softplus(-u) - softplus(u);
}

ToyPolicy::ToyPolicy(std::size_t feature_dim, std::size_t dims, int prompt_count)
    : feature_dim_(feature_dim), dims_(dims), prompt_count_(prompt_count)
{
    if (feature_dim == 0 || dims == 0 || dims > kIqaDims || prompt_count < 1)
        throw Error(ErrorCode::BadArgument, "invalid toy policy shape");
}

std::vector<double> ToyPolicy::initial_params(std::uint64_t seed, double init_log_sigma) const
{
    std::vector<double> p(parameter_count(), 0.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.05);
    for (std::size_t i = 0; i < feature_dim_ * dims_; ++i)
        p[i] = normal(rng);
    std::fill(p.end() - static_cast<std::ptrdiff_t>(dims_), p.end(), init_log_sigma);
    return p;
}

double ToyPolicy::prompt_offset(int prompt_id, std::size_t dim) const
{
    if (prompt_id < 1 || prompt_id > prompt_count_)
        throw Error(ErrorCode::BadArgument, "prompt_id " + std::to_string(prompt_id) + " outside [1, " +
                                                std::to_string(prompt_count_) + "]");
    if (prompt_id == 1)
        return 0.0;
    return 0.15 * std::sin(2.1 * prompt_id + 1.7 * static_cast<double>(dim));
}

void ToyPolicy::check_shape(std::span<const double> params, std::size_t features) const
{
    if (params.size() != parameter_count() || features != feature_dim_)
        throw Error(ErrorCode::ShapeMismatch, "toy policy parameter or feature size mismatch");
}

std::vector<double> ToyPolicy::action_mean(std::span<const double> params, std::span<const double> features,
                                           int prompt_id) const
{
    check_shape(params, features.size());
    std::vector<double> mu(dims_);
    const auto bias = params.subspan(feature_dim_ * dims_, dims_);
    for (std::size_t d = 0; d < dims_; ++d) {
        double m = bias[d] + prompt_offset(prompt_id, d);
        for (std::size_t f = 0; f < feature_dim_; ++f)
            m += features[f] * params[f * dims_ + d];
        mu[d] = m;
    }
    return mu;
}

double ToyPolicy::mean_score(std::span<const double> params, std::span<const double> features) const
{
    const auto mu = action_mean(params, features, 1);
    double sum = 0.0;
    for (double m : mu)
        sum += squash(m);
    return sum / static_cast<double>(dims_);
}

double ToyPolicy::log_density(std::span<const double> params, const ScoreTrajectory& traj) const
{
    if (traj.action.size() != dims_)
        throw Error(ErrorCode::ShapeMismatch, "trajectory action size mismatch");
    const auto mu = action_mean(params, traj.features, traj.prompt_id);
    const auto log_sigma = params.subspan(feature_dim_ * dims_ + dims_, dims_);
    double lp = 0.0;
    for (std::size_t d = 0; d < dims_; ++d) {
        const double z = (traj.action[d] - mu[d]) * std::exp(-log_sigma[d]);
        lp += -0.5 * z * z - log_sigma[d] - kLogSqrtTwoPi - log_squash_jacobian(traj.action[d]);
    }
    return lp;
}

void ToyPolicy::accumulate_grad_log_density(std::span<const double> params, const ScoreTrajectory& traj,
                                            double weight, std::span<double> grad) const
{
    if (grad.size() != parameter_count() || traj.action.size() != dims_)
        throw Error(ErrorCode::ShapeMismatch, "gradient buffer or action size mismatch");
    const auto mu = action_mean(params, traj.features, traj.prompt_id);
    const std::size_t bias_at = feature_dim_ * dims_;
    const std::size_t sigma_at = bias_at + dims_;
    for (std::size_t d = 0; d < dims_; ++d) {
        const double inv_var = std::exp(-2.0 * params[sigma_at + d]);
        const double resid = traj.action[d] - mu[d];
        const double d_mean = weight * resid * inv_var;
        for (std::size_t f = 0; f < feature_dim_; ++f)
            grad[f * dims_ + d] += d_mean * traj.features[f];
        grad[bias_at + d] += d_mean;
        grad[sigma_at + d] += weight * (resid * resid * inv_var - 1.0);
    }
}

std::vector<SampledGeneration> sample_generations(const ToyPolicy& policy, std::span<const double> params,
                                                  std::span<const double> features, int k, int prompt_id,
                                                  std::uint64_t seed)
{
    if (k < 1)
        throw Error(ErrorCode::BadArgument, "k must be >= 1");
    const auto mu = policy.action_mean(params, features, prompt_id);
    const auto log_sigma = params.subspan(policy.feature_dim() * policy.dims() + policy.dims(), policy.dims());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<SampledGeneration> out;
    out.reserve(static_cast<std::size_t>(k));
    std::vector<double> scores(policy.dims());
    for (int i = 0; i < k; ++i) {
        ScoreTrajectory traj{std::vector<double>(features.begin(), features.end()), prompt_id,
                             std::vector<double>(policy.dims())};
        for (std::size_t d = 0; d < policy.dims(); ++d) {
            traj.action[d] = mu[d] + std::exp(log_sigma[d]) * normal(rng);
            scores[d] = squash(traj.action[d]);
        }
        const double logp = policy.log_density(params, traj);
        auto gen = Generation::valid(ScoreVector::validate(scores, policy.dims()), logp, prompt_id);
        out.push_back({std::move(gen), std::move(traj)});
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t step, std::uint64_t slot) noexcept
{
    return splitmix64(splitmix64(splitmix64(seed) ^ step) ^ (slot * 0xD1B54A32D192ED03ULL));
}

MetricReport evaluate_policy(const ToyPolicy& policy, std::span<const double> params, const SyntheticDataset& dataset)
{
    std::vector<double> pred, truth;
    pred.reserve(dataset.samples.size());
    truth.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) {
        pred.push_back(policy.mean_score(params, s.features));
        truth.push_back(s.mos);
    }
    return evaluate(pred, truth);
}

RunReport run_training(const RunConfig& cfg, const SyntheticDataset& dataset)
{
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    if (dataset.samples.empty())
        throw Error(ErrorCode::BadArgument, "empty dataset");
    if (static_cast<std::size_t>(cfg.batch_size) > dataset.samples.size())
        throw Error(ErrorCode::InvalidValue, "batch_size exceeds dataset size");

    const std::size_t feature_dim = dataset.samples.front().features.size();
    const std::size_t dims = dataset.samples.front().quality.size();
    const ToyPolicy policy(feature_dim, dims, cfg.prompt_count);

    PolicySnapshot snapshot{policy.initial_params(derive_seed(cfg.seed, ~0ULL, 0), cfg.init_log_sigma), 0};
    const std::vector<double> reference = snapshot.params;

    const int total_steps = cfg.stage1_steps + cfg.stage2_steps;
    AdamW optimizer(policy.parameter_count(), cfg.learning_rate, cfg.weight_decay, total_steps * cfg.inner_epochs);

    RunReport report;
    report.config_echo = cfg;
    report.per_step.reserve(static_cast<std::size_t>(total_steps));

    std::mt19937_64 batch_rng(derive_seed(cfg.seed, ~0ULL, 1));
    std::vector<std::size_t> order(dataset.samples.size());
    std::iota(order.begin(), order.end(), 0);

    auto sched = initial_schedule(cfg);
    for (int step = 0; step < total_steps; ++step) {
        // Partial Fisher-Yates draw of B distinct samples.
        for (int j = 0; j < cfg.batch_size; ++j) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), order.size() - 1);
            std::swap(order[static_cast<std::size_t>(j)], order[pick(batch_rng)]);
        }

        std::vector<SampleGroup> groups;
        RolloutBatch<ScoreTrajectory> rollouts;
        groups.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (int j = 0; j < cfg.batch_size; ++j) {
            const auto& sample = dataset.samples[order[static_cast<std::size_t>(j)]];
            const auto stream = derive_seed(cfg.seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(j));
            std::mt19937_64 prompt_rng(stream);
            const int prompt_id =
                sched.prompt_pool_size > 1
                    ? std::uniform_int_distribution<int>(1, sched.prompt_pool_size)(prompt_rng)
                    : 1;
            auto draws = sample_generations(policy, snapshot.params, sample.features, sched.k, prompt_id,
                                            splitmix64(stream));
            std::vector<Generation> gens;
            auto& row = rollouts.emplace_back();
            for (auto& d : draws) {
                const double logp_ref = policy.log_density(reference, d.trajectory);
                gens.push_back(d.generation);
                row.push_back({std::move(d.trajectory), d.generation.log_density, logp_ref, 0.0});
            }
            groups.push_back(make_sample_group(sample.sample_id, sample.mos, sample.features, std::move(gens),
                                               static_cast<std::size_t>(sched.k)));
        }

        const auto rewards = score_batch(groups, cfg, sched.stage, dims);

        StepRecord rec;
        rec.step = step;
        rec.stage = sched.stage;
        rec.k = sched.k;
        double reward_sum = 0.0, reward_std_sum = 0.0, gen_std_sum = 0.0, answer_std_sum = 0.0;
        std::size_t reward_count = 0;
        for (std::size_t j = 0; j < groups.size(); ++j) {
            std::vector<double> totals, means;
            for (std::size_t i = 0; i < groups[j].generations.size(); ++i) {
                rollouts[j][i].advantage = rewards[j][i].advantage;
                totals.push_back(rewards[j][i].r_total);
                const auto& scores = *groups[j].generations[i].scores;
                means.push_back(scores.mean());
                answer_std_sum += scores.population_std();
            }
            reward_sum += std::accumulate(totals.begin(), totals.end(), 0.0);
            reward_count += totals.size();
            reward_std_sum += population_std(totals);
            gen_std_sum += population_std(means);
        }
        const double b = static_cast<double>(groups.size());
        rec.mean_reward = reward_sum / static_cast<double>(reward_count);
        rec.reward_std = reward_std_sum / b;
        rec.mean_generation_std = gen_std_sum / b;
        rec.mean_cot_answer_std = answer_std_sum / static_cast<double>(reward_count);

        for (int epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
            ObjectiveStats stats;
            snapshot = policy_gradient_step(policy, snapshot, optimizer, rollouts, cfg, &stats);
            if (epoch == 0) {
                rec.objective = stats.objective;
                rec.mean_kl = stats.mean_kl;
            }
            rec.clip_fraction = stats.clip_fraction;
        }
        report.per_step.push_back(rec);
        sched = advance_schedule(sched, cfg);
    }

    report.final_metrics = evaluate_policy(policy, snapshot.params, dataset);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace prpo
