#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prpo/error.hpp"
#include "prpo/qa_types.hpp"

namespace prpo {

struct PolicySnapshot {
    std::vector<double> params;
    std::uint64_t version = 0;
};

/// exp(logp_new - logp_old). Throws Overflow instead of returning inf.
double importance_ratio(double logp_new, double logp_old);

/// min(ratio * adv, clamp(ratio, 1 - eps, 1 + eps) * adv).
double clipped_surrogate(double ratio, double advantage, double clip_eps) noexcept;

/// True when the clamped branch of `clipped_surrogate` is the strict minimum,
/// i.e. the term carries no gradient through the ratio.
bool surrogate_clipped(double ratio, double advantage, double clip_eps) noexcept;

/// rho - log(rho) - 1 with rho = pi_ref / pi_theta. Non-negative, zero iff equal.
double kl_approx(double logp_theta, double logp_ref) noexcept;

/// Log densities of one trajectory under the live, rollout and reference
/// policies, plus its group-relative advantage.
struct ObjectiveTerm {
    double logp_live = 0.0;
    double logp_old = 0.0;
    double logp_ref = 0.0;
    double advantage = 0.0;
};

struct ObjectiveStats {
    double objective = 0.0;
    double mean_kl = 0.0;
    double clip_fraction = 0.0;
};

/// Mean over all B*K terms of clipped surrogate minus kl_beta * KL. Every group
/// must hold `expected_k` terms when given (ShapeMismatch otherwise).
ObjectiveStats batch_objective(std::span<const std::vector<ObjectiveTerm>> groups, const RunConfig& cfg,
                               std::optional<std::size_t> expected_k = std::nullopt);

/// A policy with a closed-form log-density and its parameter gradient.
template <class M>
concept LogDensityModel = requires(const M& m, std::span<const double> params,
                                   const typename M::trajectory_type& traj, double weight, std::span<double> grad) {
    { m.parameter_count() } -> std::convertible_to<std::size_t>;
    { m.log_density(params, traj) } -> std::convertible_to<double>;
    m.accumulate_grad_log_density(params, traj, weight, grad);
};

template <class Trajectory>
struct PolicyRollout {
    Trajectory trajectory;
    double logp_old = 0.0;
    double logp_ref = 0.0;
    double advantage = 0.0;
};

template <class Trajectory>
using RolloutBatch = std::vector<std::vector<PolicyRollout<Trajectory>>>;

struct ObjectiveGradient {
    ObjectiveStats stats;
    std::vector<double> gradient;
};

/// Objective and its analytic gradient at `params`. Each term contributes
/// (1/BK) * w * grad log pi_theta with w = [unclipped] ratio * adv - kl_beta (1 - rho_ref).
template <LogDensityModel M>
ObjectiveGradient objective_with_gradient(const M& model, std::span<const double> params,
                                          const RolloutBatch<typename M::trajectory_type>& batch,
                                          const RunConfig& cfg)
{
    ObjectiveGradient out;
    out.gradient.assign(model.parameter_count(), 0.0);

    std::vector<std::vector<ObjectiveTerm>> terms;
    terms.reserve(batch.size());
    std::size_t total = 0;
    for (const auto& group : batch)
        total += group.size();
    if (total == 0)
        return out;
    const double scale = 1.0 / static_cast<double>(total);

    for (const auto& group : batch) {
        auto& row = terms.emplace_back();
        row.reserve(group.size());
        for (const auto& r : group) {
            const double logp = model.log_density(params, r.trajectory);
            row.push_back({logp, r.logp_old, r.logp_ref, r.advantage});

            const double ratio = importance_ratio(logp, r.logp_old);
            const double rho_ref = std::exp(r.logp_ref - logp);
            double weight = -cfg.kl_beta * (1.0 - rho_ref);
            if (!surrogate_clipped(ratio, r.advantage, cfg.clip_eps))
                weight += ratio * r.advantage;
            if (weight != 0.0)
                model.accumulate_grad_log_density(params, r.trajectory, weight * scale, out.gradient);
        }
    }
    out.stats = batch_objective(terms, cfg);
    return out;
}

/// Decoupled-weight-decay Adam ascent with a learning rate decaying linearly to
/// zero over `total_steps` updates.
class AdamW {
public:
    AdamW(std::size_t parameter_count, double learning_rate, double weight_decay, int total_steps,
          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// Ascends along `gradient`; returns the successor snapshot (version + 1).
    PolicySnapshot step(const PolicySnapshot& snapshot, std::span<const double> gradient);

    double current_learning_rate() const noexcept;
    int steps_taken() const noexcept { return t_; }

private:
    double lr_;
    double weight_decay_;
    int total_steps_;
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<double> m_, v_;
};

/// Throws NonFiniteGradient naming the first offending parameter index.
void check_gradient(std::span<const double> gradient);

/// One regularized GRPO update of `snapshot` on `batch`.
template <LogDensityModel M>
PolicySnapshot policy_gradient_step(const M& model, const PolicySnapshot& snapshot, AdamW& optimizer,
                                    const RolloutBatch<typename M::trajectory_type>& batch, const RunConfig& cfg,
                                    ObjectiveStats* stats = nullptr)
{
    auto eval = objective_with_gradient(model, snapshot.params, batch, cfg);
    check_gradient(eval.gradient);
    if (stats)
        *stats = eval.stats;
    return optimizer.step(snapshot, eval.gradient);
}

struct StageSchedule {
    Stage stage = Stage::Explore;
    int k = 0;
    int prompt_pool_size = 0;
    bool std_penalty_on = false;
    int steps_remaining = 0;

    bool operator==(const StageSchedule&) const = default;
};

/// Explore (K = k_stage1, X prompts, penalty on) unless stage1_steps is zero.
StageSchedule initial_schedule(const RunConfig& cfg);

/// Counts down one step; exhausting Explore switches to Stabilize
/// (K = k_stage2, single prompt, penalty off). An exhausted Stabilize stays put.
StageSchedule advance_schedule(const StageSchedule& sched, const RunConfig& cfg);

}  // namespace prpo
