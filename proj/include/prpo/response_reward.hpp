#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "prpo/qa_types.hpp"

namespace prpo {

/// Three distinct generation indices of one sample, stored ascending.
class TripletIndex {
public:
    TripletIndex(std::size_t a, std::size_t b, std::size_t c);

    const std::array<std::size_t, 3>& members() const noexcept { return members_; }
    bool contains(std::size_t i) const noexcept;

private:
    std::array<std::size_t, 3> members_;
};

/// All triplets drawn from `pool` that contain `anchor`.
std::vector<TripletIndex> triplets_containing(std::size_t anchor, const std::vector<std::size_t>& pool);

/// Minimizer of sum_t |s_t - xi| over three scalars, i.e. their median.
double triplet_stabilizer(double a, double b, double c) noexcept;

/// Mean over every triplet of format-valid generations containing `gen_index` of
/// exp(-gamma * |s_anchor - median|) on dimension `dim`. Lies in (0, 1].
/// Throws TooFewGenerations if fewer than three valid generations exist.
double local_alignment(const SampleGroup& group, std::size_t gen_index, std::size_t dim, double gamma);

/// Uniform mean of `local_alignment` over the `dims` score dimensions.
double response_reward(const SampleGroup& group, std::size_t gen_index, double gamma, std::size_t dims);

/// lambda_std * (delta_min - sigma) when the population std sigma of the scores is
/// below delta_min, else 0. The caller subtracts this from the total reward.
double std_penalty(const ScoreVector& scores, double delta_min, double lambda_std) noexcept;

}  // namespace prpo
