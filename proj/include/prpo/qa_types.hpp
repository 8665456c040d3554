#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prpo {

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 5.0;

// Saturation, granularity, sharpness, foreground, background.
inline constexpr std::size_t kIqaDims = 5;
// Global-temporal, local-spatial.
inline constexpr std::size_t kVqaDims = 2;

enum class TaskKind { Iqa, Vqa };
enum class Stage { Explore, Stabilize };

std::size_t dims_for(TaskKind kind) noexcept;
const char* to_string(TaskKind kind) noexcept;
const char* to_string(Stage stage) noexcept;

/// Per-dimension quality scores of one generation. Every entry lies in [1, 5];
/// the dimension count is 5 for image tasks and 2 for video tasks.
class ScoreVector {
public:
    static constexpr std::size_t kMaxDims = kIqaDims;

    /// Throws WrongArity if `raw.size() != expected_dims` and OutOfRange for the
    /// first entry outside [1, 5]. Values are never clamped.
    static ScoreVector validate(std::span<const double> raw, std::size_t expected_dims = kIqaDims);

    std::size_t size() const noexcept { return size_; }
    double operator[](std::size_t d) const noexcept { return values_[d]; }
    std::span<const double> values() const noexcept { return {values_.data(), size_}; }

    double mean() const noexcept;
    /// Population (divide-by-D) standard deviation across dimensions.
    double population_std() const noexcept;

    bool operator==(const ScoreVector& other) const noexcept;

private:
    ScoreVector() = default;

    std::array<double, kMaxDims> values_{};
    std::size_t size_ = 0;
};

/// One sampled trajectory. A malformed generation carries no scores and earns
/// no reward beyond the (zero) format reward.
struct Generation {
    std::optional<std::string> raw_text;
    std::optional<ScoreVector> scores;
    double log_density = 0.0;
    bool format_valid = false;
    int prompt_id = 1;

    static Generation valid(ScoreVector scores, double log_density, int prompt_id = 1,
                            std::optional<std::string> raw_text = std::nullopt);
    static Generation malformed(std::optional<std::string> raw_text, int prompt_id = 1);
};

struct SampleGroup {
    std::string sample_id;
    double mos = kMinScore;
    std::vector<double> features;
    std::vector<Generation> generations;

    std::size_t size() const noexcept { return generations.size(); }
    std::size_t valid_count() const noexcept;
};

/// Validated construction. `expected_k`, when given, must match the generation count.
SampleGroup make_sample_group(std::string sample_id, double mos, std::vector<double> features,
                              std::vector<Generation> generations,
                              std::optional<std::size_t> expected_k = std::nullopt);

/// Linear min-max map of a dataset-native MOS onto [1, 5].
double normalize_mos(double raw, double scale_min, double scale_max);

struct RewardBreakdown {
    double r_format = 0.0;
    double r_loc = 0.0;
    double r_pair = 0.0;
    double r_tri = 0.0;
    double r_std_penalty = 0.0;
    double r_total = 0.0;
    double advantage = 0.0;
};

struct RunConfig {
    double alpha = 0.5;
    double beta1 = 0.375;
    double beta2 = 0.125;
    double gamma = 1.0;
    int k_stage1 = 12;
    int k_stage2 = 6;
    int batch_size = 16;
    int prompt_count = 5;
    double delta_min = 0.5;
    double lambda_std = 0.5;
    double clip_eps = 0.2;
    double kl_beta = 0.04;
    double learning_rate = 1e-2;
    double weight_decay = 1e-4;
    double adv_eps = 1e-8;
    double pair_eps = 1e-8;
    std::uint64_t seed = 0;
    int stage1_steps = 200;
    int stage2_steps = 300;
    int inner_epochs = 1;
    // Synthetic dataset used by `train`.
    int dataset_size = 64;
    int feature_dim = 8;
    double dataset_noise = 0.1;
    double init_log_sigma = -1.0;

    /// Throws InvalidValue naming the first key whose bound is violated.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

}  // namespace prpo
