#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prpo/qa_types.hpp"

namespace prpo {

/// Brute-force reference for the whole reward stack. Every quantity is
/// recomputed from the raw scores by explicit enumeration: stabilizers by
/// minimizing the L1 cost over candidate points, ranks by counting, and
/// pair/triplet rewards by scanning all sample combinations. Shares no code
/// with the production path beyond the domain types.
std::vector<std::vector<RewardBreakdown>> oracle_rewards(std::span<const SampleGroup> groups, const RunConfig& cfg,
                                                         Stage stage, std::size_t dims);

/// Largest absolute difference over every field of two reward tables.
/// Throws ShapeMismatch if the tables differ in shape.
double max_abs_difference(const std::vector<std::vector<RewardBreakdown>>& a,
                          const std::vector<std::vector<RewardBreakdown>>& b);

}  // namespace prpo
