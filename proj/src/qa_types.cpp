#include "prpo/qa_types.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "prpo/error.hpp"

namespace prpo {

std::size_t dims_for(TaskKind kind) noexcept
{
    return kind == TaskKind::Iqa ? kIqaDims : kVqaDims;
}

const char* to_string(TaskKind kind) noexcept
{
    return kind == TaskKind::Iqa ? "iqa" : "vqa";
}

const char* to_string(Stage stage) noexcept
{
    return stage == Stage::Explore ? "explore" : "stabilize";
}

ScoreVector ScoreVector::validate(std::span<const double> raw, std::size_t expected_dims)
{
    if (expected_dims == 0 || expected_dims > kMaxDims)
        throw Error(ErrorCode::BadArgument, "unsupported dimension count " + std::to_string(expected_dims));
    if (raw.size() != expected_dims)
        throw Error(ErrorCode::WrongArity, "expected " + std::to_string(expected_dims) + " scores, got " +
                                               std::to_string(raw.size()));
    ScoreVector out;
    for (std::size_t d = 0; d < raw.size(); ++d) {
        const double v = raw[d];
        if (!(v >= kMinScore && v <= kMaxScore)) {
            std::ostringstream msg;
            msg << "dim " << d << " value " << v;
            throw Error(ErrorCode::OutOfRange, msg.str());
        }
        out.values_[d] = v;
    }
    out.size_ = raw.size();
    return out;
}

double ScoreVector::mean() const noexcept
{
    const auto v = values();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(size_);
}

double ScoreVector::population_std() const noexcept
{
    const double mu = mean();
    double ss = 0.0;
    for (double x : values())
        ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(size_));
}

bool ScoreVector::operator==(const ScoreVector& other) const noexcept
{
    if (size_ != other.size_)
        return false;
    for (std::size_t d = 0; d < size_; ++d)
        if (values_[d] != other.values_[d])
            return false;
    return true;
}

Generation Generation::valid(ScoreVector scores, double log_density, int prompt_id,
                             std::optional<std::string> raw_text)
{
    if (!std::isfinite(log_density))
        throw Error(ErrorCode::InvalidValue, "log_density must be finite");
    Generation g;
    g.raw_text = std::move(raw_text);
    g.scores = scores;
    g.log_density = log_density;
    g.format_valid = true;
    g.prompt_id = prompt_id;
    return g;
}

Generation Generation::malformed(std::optional<std::string> raw_text, int prompt_id)
{
    Generation g;
    g.raw_text = std::move(raw_text);
    g.prompt_id = prompt_id;
    return g;
}

std::size_t SampleGroup::valid_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& g : generations)
        n += g.format_valid ? 1 : 0;
    return n;
}

SampleGroup make_sample_group(std::string sample_id, double mos, std::vector<double> features,
                              std::vector<Generation> generations, std::optional<std::size_t> expected_k)
{
    if (!(mos >= kMinScore && mos <= kMaxScore)) {
        std::ostringstream msg;
        msg << "mos " << mos << " of sample '" << sample_id << "' outside [1,5]";
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    if (expected_k && generations.size() != *expected_k)
        throw Error(ErrorCode::ShapeMismatch, "sample '" + sample_id + "' has " +
                                                  std::to_string(generations.size()) + " generations, expected " +
                                                  std::to_string(*expected_k));
    for (const auto& g : generations) {
        if (g.format_valid != g.scores.has_value())
            throw Error(ErrorCode::BadArgument, "generation validity flag disagrees with score presence");
        if (!std::isfinite(g.log_density))
            throw Error(ErrorCode::InvalidValue, "log_density must be finite");
    }
    for (double f : features)
        if (!std::isfinite(f))
            throw Error(ErrorCode::InvalidValue, "non-finite feature in sample '" + sample_id + "'");
    return SampleGroup{std::move(sample_id), mos, std::move(features), std::move(generations)};
}

double normalize_mos(double raw, double scale_min, double scale_max)
{
    if (!(scale_max > scale_min))
        throw Error(ErrorCode::BadArgument, "MOS scale must satisfy min < max");
    if (raw < scale_min || raw > scale_max) {
        std::ostringstream msg;
        msg << "raw MOS " << raw << " outside declared scale [" << scale_min << ", " << scale_max << "]";
        throw Error(ErrorCode::OutOfRange, msg.str());
    }
    return kMinScore + (kMaxScore - kMinScore) * (raw - scale_min) / (scale_max - scale_min);
}

namespace {

void require(bool ok, const char* key)
{
    if (!ok)
        throw Error(ErrorCode::InvalidValue, key);
}

}  // namespace

void RunConfig::validate() const
{
    require(alpha >= 0.0 && alpha <= 1.0, "alpha");
    require(std::isfinite(beta1), "beta1");
    require(std::isfinite(beta2), "beta2");
    require(gamma > 0.0 && std::isfinite(gamma), "gamma");
    require(k_stage1 >= 1, "k_stage1");
    require(k_stage2 >= 1, "k_stage2");
    require(batch_size >= 2, "batch_size");
    require(prompt_count >= 1, "prompt_count");
    require(delta_min >= 0.0 && std::isfinite(delta_min), "delta_min");
    require(lambda_std >= 0.0 && std::isfinite(lambda_std), "lambda_std");
    require(clip_eps > 0.0 && clip_eps < 1.0, "clip_eps");
    require(kl_beta >= 0.0 && std::isfinite(kl_beta), "kl_beta");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate");
    require(weight_decay >= 0.0 && std::isfinite(weight_decay), "weight_decay");
    require(adv_eps > 0.0 && std::isfinite(adv_eps), "adv_eps");
    require(pair_eps > 0.0 && std::isfinite(pair_eps), "pair_eps");
    require(stage1_steps >= 0, "stage1_steps");
    require(stage2_steps >= 0, "stage2_steps");
    require(inner_epochs >= 1, "inner_epochs");
    require(dataset_size >= 2, "dataset_size");
    require(feature_dim >= 1, "feature_dim");
    require(dataset_noise >= 0.0 && std::isfinite(dataset_noise), "dataset_noise");
    require(std::isfinite(init_log_sigma), "init_log_sigma");
}

}  // namespace prpo
