#include "prpo/grpo_engine.hpp"

#include <algorithm>
#include <cfloat>
#include <limits>
#include <sstream>

namespace prpo {

double importance_ratio(double logp_new, double logp_old)
{
    const double diff = logp_new - logp_old;
    // log(DBL_MAX) ~ 709.78
    if (!std::isfinite(diff) || diff > std::log(std::numeric_limits<double>::max())) {
        std::ostringstream msg;
        msg << "log-ratio " << diff;
        throw Error(ErrorCode::Overflow, msg.str());
    }
    return std::exp(diff);
}

double clipped_surrogate(double ratio, double advantage, double clip_eps) noexcept
{
    const double clamped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    return std::min(ratio * advantage, clamped * advantage);
}

bool surrogate_clipped(double ratio, double advantage, double clip_eps) noexcept
{
    const double clamped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    return clamped * advantage < ratio * advantage;
}

double kl_approx(double logp_theta, double logp_ref) noexcept
{
    const double log_rho = logp_ref - logp_theta;
    // expm1 keeps the estimator non-negative and exact near rho = 1.
    return std::expm1(log_rho) - log_rho;
}

ObjectiveStats batch_objective(std::span<const std::vector<ObjectiveTerm>> groups, const RunConfig& cfg,
                               std::optional<std::size_t> expected_k)
{
    ObjectiveStats stats;
    std::size_t total = 0, clipped = 0;
    double surrogate = 0.0, kl = 0.0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (expected_k && groups[j].size() != *expected_k)
            throw Error(ErrorCode::ShapeMismatch, "group " + std::to_string(j) + " has " +
                                                      std::to_string(groups[j].size()) + " terms, expected " +
                                                      std::to_string(*expected_k));
        for (const auto& t : groups[j]) {
            const double ratio = importance_ratio(t.logp_live, t.logp_old);
            surrogate += clipped_surrogate(ratio, t.advantage, cfg.clip_eps);
            kl += kl_approx(t.logp_live, t.logp_ref);
            clipped += surrogate_clipped(ratio, t.advantage, cfg.clip_eps) ? 1 : 0;
            ++total;
        }
    }
    if (total == 0)
        return stats;
    const double n = static_cast<double>(total);
    stats.objective = surrogate / n - cfg.kl_beta * kl / n;
    stats.mean_kl = kl / n;
    stats.clip_fraction = static_cast<double>(clipped) / n;
    return stats;
}

AdamW::AdamW(std::size_t parameter_count, double learning_rate, double weight_decay, int total_steps, double beta1,
             double beta2, double eps)
    : lr_(learning_rate), weight_decay_(weight_decay), total_steps_(std::max(total_steps, 1)), beta1_(beta1),
      beta2_(beta2), eps_(eps), m_(parameter_count, 0.0), v_(parameter_count, 0.0)
{}

double AdamW::current_learning_rate() const noexcept
{
    const double frac = 1.0 - static_cast<double>(t_) / static_cast<double>(total_steps_);
    return lr_ * std::max(frac, 0.0);
}

PolicySnapshot AdamW::step(const PolicySnapshot& snapshot, std::span<const double> gradient)
{
    if (gradient.size() != m_.size() || snapshot.params.size() != m_.size())
        throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match parameter count");
    const double lr = current_learning_rate();
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);

    PolicySnapshot next{snapshot.params, snapshot.version + 1};
    for (std::size_t p = 0; p < m_.size(); ++p) {
        m_[p] = beta1_ * m_[p] + (1.0 - beta1_) * gradient[p];
        v_[p] = beta2_ * v_[p] + (1.0 - beta2_) * gradient[p] * gradient[p];
        const double m_hat = m_[p] / bc1;
        const double v_hat = v_[p] / bc2;
        next.params[p] += lr * m_hat / (std::sqrt(v_hat) + eps_) - lr * weight_decay_ * snapshot.params[p];
    }
    return next;
}

void check_gradient(std::span<const double> gradient)
{
    for (std::size_t p = 0; p < gradient.size(); ++p)
        if (!std::isfinite(gradient[p]))
            throw Error(ErrorCode::NonFiniteGradient, "parameter index " + std::to_string(p));
}

StageSchedule initial_schedule(const RunConfig& cfg)
{
    if (cfg.stage1_steps > 0)
        return {Stage::Explore, cfg.k_stage1, cfg.prompt_count, true, cfg.stage1_steps};
    return {Stage::Stabilize, cfg.k_stage2, 1, false, cfg.stage2_steps};
}

StageSchedule advance_schedule(const StageSchedule& sched, const RunConfig& cfg)
{
    StageSchedule next = sched;
    if (next.steps_remaining > 0)
        --next.steps_remaining;
    if (next.stage == Stage::Explore && next.steps_remaining == 0)
        return {Stage::Stabilize, cfg.k_stage2, 1, false, cfg.stage2_steps};
    return next;
}

}  // namespace prpo
