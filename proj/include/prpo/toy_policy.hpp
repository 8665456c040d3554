#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prpo/grpo_engine.hpp"
#include "prpo/qa_types.hpp"
#include "prpo/run_report.hpp"

namespace prpo {

struct SyntheticSample {
    std::string sample_id;
    std::vector<double> features;
    std::vector<double> quality;  // per dimension, in [1, 5]
    double mos = 0.0;             // mean of `quality`
};

struct SyntheticDataset {
    std::vector<SyntheticSample> samples;
    std::uint64_t seed = 0;
};

/// Standard-normal features pushed through a fixed affine ground-truth map,
/// plus Gaussian noise, clamped to [1, 5]. Deterministic in `seed`.
SyntheticDataset generate_dataset(int n, int feature_dim, double noise, std::uint64_t seed,
                                  std::size_t dims = kIqaDims);

/// Noise-free ground-truth quality of a feature vector, before clamping.
std::vector<double> ground_truth_quality(std::span<const double> features, std::size_t dims = kIqaDims);

/// 1 + 4 * sigmoid(u): maps a pre-squash action onto the score range.
double squash(double u) noexcept;
/// log |d squash / du|.
double log_squash_jacobian(double u) noexcept;

/// Everything needed to re-evaluate the log-density of a sampled generation.
struct ScoreTrajectory {
    std::vector<double> features;
    int prompt_id = 1;
    std::vector<double> action;  // pre-squash, one entry per dimension
};

/// Diagonal Gaussian over a pre-squash action with mean W^T x + b + prompt
/// offset and per-dimension log std; scores are the squashed action.
/// Parameter layout: W (feature-major, F x D), then b (D), then log_sigma (D).
class ToyPolicy {
public:
    using trajectory_type = ScoreTrajectory;

    ToyPolicy(std::size_t feature_dim, std::size_t dims = kIqaDims, int prompt_count = 5);

    std::size_t feature_dim() const noexcept { return feature_dim_; }
    std::size_t dims() const noexcept { return dims_; }
    std::size_t parameter_count() const noexcept { return feature_dim_ * dims_ + 2 * dims_; }

    /// Small seeded weights, zero bias, constant log std.
    std::vector<double> initial_params(std::uint64_t seed, double init_log_sigma) const;

    /// Fixed per-prompt mean offset; prompt 1 is the standard prompt (zero offset).
    double prompt_offset(int prompt_id, std::size_t dim) const;

    /// Pre-squash mean for each dimension.
    std::vector<double> action_mean(std::span<const double> params, std::span<const double> features,
                                     int prompt_id) const;

    /// Mean over dimensions of the squashed action mean under the standard prompt.
    double mean_score(std::span<const double> params, std::span<const double> features) const;

    /// Exact log-density of the squashed scores, including the Jacobian term.
    double log_density(std::span<const double> params, const ScoreTrajectory& traj) const;

    /// grad += weight * d log_density / d params.
    void accumulate_grad_log_density(std::span<const double> params, const ScoreTrajectory& traj, double weight,
                                     std::span<double> grad) const;

private:
    void check_shape(std::span<const double> params, std::size_t features) const;

    std::size_t feature_dim_;
    std::size_t dims_;
    int prompt_count_;
};

struct SampledGeneration {
    Generation generation;
    ScoreTrajectory trajectory;
};

/// k independent draws for one stimulus; deterministic in `seed`.
std::vector<SampledGeneration> sample_generations(const ToyPolicy& policy, std::span<const double> params,
                                                  std::span<const double> features, int k, int prompt_id,
                                                  std::uint64_t seed);

/// Counter-based stream derivation: a distinct seed per (seed, step, slot).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t step, std::uint64_t slot) noexcept;

/// Two-stage GRPO training of a fresh toy policy on `dataset`, followed by an
/// evaluation of the policy's mean scores against the MOS.
RunReport run_training(const RunConfig& cfg, const SyntheticDataset& dataset);

/// SRCC/PLCC/error histogram of the policy mean scores over the whole dataset.
MetricReport evaluate_policy(const ToyPolicy& policy, std::span<const double> params,
                             const SyntheticDataset& dataset);

}  // namespace prpo
