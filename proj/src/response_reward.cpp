#include "prpo/response_reward.hpp"

#include <algorithm>
#include <cmath>

#include "prpo/error.hpp"

namespace prpo {

TripletIndex::TripletIndex(std::size_t a, std::size_t b, std::size_t c) : members_{a, b, c}
{
    if (a == b || a == c || b == c)
        throw Error(ErrorCode::BadArgument, "triplet indices must be distinct");
    std::sort(members_.begin(), members_.end());
}

bool TripletIndex::contains(std::size_t i) const noexcept
{
    return std::find(members_.begin(), members_.end(), i) != members_.end();
}

std::vector<TripletIndex> triplets_containing(std::size_t anchor, const std::vector<std::size_t>& pool)
{
    std::vector<std::size_t> others;
    others.reserve(pool.size());
    for (auto idx : pool)
        if (idx != anchor)
            others.push_back(idx);

    std::vector<TripletIndex> out;
    out.reserve(others.size() * (others.size() - (others.empty() ? 0 : 1)) / 2);
    for (std::size_t a = 0; a < others.size(); ++a)
        for (std::size_t b = a + 1; b < others.size(); ++b)
            out.emplace_back(anchor, others[a], others[b]);
    return out;
}

double triplet_stabilizer(double a, double b, double c) noexcept
{
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

namespace {

std::vector<std::size_t> valid_indices(const SampleGroup& group)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < group.generations.size(); ++i)
        if (group.generations[i].format_valid)
            out.push_back(i);
    return out;
}

}  // namespace

double local_alignment(const SampleGroup& group, std::size_t gen_index, std::size_t dim, double gamma)
{
    const auto pool = valid_indices(group);
    if (pool.size() < 3)
        throw Error(ErrorCode::TooFewGenerations, "K=" + std::to_string(pool.size()) + " valid generations");
    if (gen_index >= group.generations.size() || !group.generations[gen_index].format_valid)
        throw Error(ErrorCode::BadArgument, "anchor generation " + std::to_string(gen_index) + " is not valid");
    if (dim >= group.generations[gen_index].scores->size())
        throw Error(ErrorCode::BadArgument, "dimension " + std::to_string(dim) + " out of range");
    if (!(gamma > 0.0))
        throw Error(ErrorCode::BadArgument, "gamma must be positive");

    const auto score = [&](std::size_t i) { return (*group.generations[i].scores)[dim]; };
    const double anchor = score(gen_index);

    double sum = 0.0;
    const auto triplets = triplets_containing(gen_index, pool);
    for (const auto& t : triplets) {
        const auto& m = t.members();
        const double stabilizer = triplet_stabilizer(score(m[0]), score(m[1]), score(m[2]));
        sum += std::exp(-gamma * std::abs(anchor - stabilizer));
    }
    return sum / static_cast<double>(triplets.size());
}

double response_reward(const SampleGroup& group, std::size_t gen_index, double gamma, std::size_t dims)
{
    if (dims == 0)
        throw Error(ErrorCode::BadArgument, "dims must be positive");
    double sum = 0.0;
    for (std::size_t d = 0; d < dims; ++d)
        sum += local_alignment(group, gen_index, d, gamma);
    return sum / static_cast<double>(dims);
}

double std_penalty(const ScoreVector& scores, double delta_min, double lambda_std) noexcept
{
    const double sigma = scores.population_std();
    return sigma < delta_min ? lambda_std * (delta_min - sigma) : 0.0;
}

}  // namespace prpo
