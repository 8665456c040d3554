#include <doctest.h>

#include <cmath>

#include "prpo/error.hpp"
#include "prpo/reward_aggregator.hpp"
#include "prpo/reward_oracle.hpp"
#include "support.hpp"

using namespace prpo;

TEST_CASE("total reward examples")
{
    const RunConfig cfg;
    RewardComponents c{1.0, 1.0, std::exp(0.5), 1.0, 0.0};
    const double expected = 1 + 0.5 + 0.5 * (0.375 * std::exp(0.5) + 0.125);
    CHECK(total_reward(c, cfg, Stage::Stabilize).r_total == doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == doctest::Approx(1.871635).epsilon(1e-6));

    CHECK(total_reward(RewardComponents{}, cfg, Stage::Explore).r_total == 0.0);

    c.r_std_penalty = 0.10;
    const auto explore = total_reward(c, cfg, Stage::Explore);
    CHECK(explore.r_total == doctest::Approx(expected - 0.10).epsilon(1e-15));
    CHECK(explore.r_std_penalty == 0.10);

    const auto stabilize = total_reward(c, cfg, Stage::Stabilize);
    CHECK(stabilize.r_total == doctest::Approx(expected).epsilon(1e-15));
    CHECK(stabilize.r_std_penalty == 0.0);
}

TEST_CASE("group advantages examples")
{
    const std::vector<double> r3{1.0, 2.0, 3.0};
    const auto a = group_advantages(r3, 1e-8);
    CHECK(a.mean == 2.0);
    CHECK(a.std == doctest::Approx(0.816497).epsilon(1e-6));
    CHECK(a.advantages[0] == doctest::Approx(-1.224745).epsilon(1e-6));
    CHECK(a.advantages[1] == 0.0);
    CHECK(a.advantages[2] == doctest::Approx(1.224745).epsilon(1e-6));

    const std::vector<double> flat{5.0, 5.0, 5.0};
    for (double x : group_advantages(flat, 1e-8).advantages)
        CHECK(x == 0.0);

    const std::vector<double> r2{0.0, 1.0};
    const auto b = group_advantages(r2, 1e-8);
    CHECK(b.advantages[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(b.advantages[1] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(group_advantages(std::vector<double>{}, 1e-8), Error);
}

TEST_CASE("advantages are centred and unit-variance")
{
    test::Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> r(static_cast<std::size_t>(rng.integer(2, 12)));
        for (auto& x : r)
            x = rng.normal(1.0, rng.uniform(1e-5, 3.0));
        const auto g = group_advantages(r, 1e-8);
        double mean = 0, var = 0;
        for (double a : g.advantages)
            mean += a / static_cast<double>(r.size());
        for (double a : g.advantages)
            var += (a - mean) * (a - mean) / static_cast<double>(r.size());
        CHECK(std::fabs(mean) < 1e-9);
        CHECK(std::fabs(var - 1.0) < 1e-9);
    }
}

TEST_CASE("advantages are shift and scale invariant")
{
    test::Rng rng(32);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> r(static_cast<std::size_t>(rng.integer(2, 12)));
        for (auto& x : r)
            x = rng.uniform(-2, 3);
        const double shift = rng.uniform(-5, 5), scale = rng.uniform(0.1, 10);
        std::vector<double> shifted = r, scaled = r;
        for (auto& x : shifted)
            x += shift;
        for (auto& x : scaled)
            x *= scale;
        const auto base_group = group_advantages(r, 1e-8);
        if (base_group.std < 0.1)
            continue;  // keep cancellation error well under the tolerance
        const auto& base = base_group.advantages;
        const auto s1 = group_advantages(shifted, 1e-8).advantages;
        const auto s2 = group_advantages(scaled, 1e-8).advantages;
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(std::fabs(base[i] - s1[i]) < 1e-12);
            CHECK(std::fabs(base[i] - s2[i]) < 1e-9);
        }
    }
}

TEST_CASE("score_batch matches the reference on random batches")
{
    test::Rng rng(33);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t dims = rng.chance(0.5) ? kIqaDims : kVqaDims;
        const auto groups = test::random_batch(rng, 6, 7, dims);
        RunConfig cfg;
        cfg.alpha = rng.uniform(0, 1);
        cfg.gamma = rng.uniform(0.2, 2.0);
        const Stage stage = rng.chance(0.5) ? Stage::Explore : Stage::Stabilize;
        const auto got = score_batch(groups, cfg, stage, dims);
        // Advantages divide by the group std, so rounding in the mean is amplified.
        CHECK(test::max_reference_gap(got, test::reference_rewards(groups, cfg, stage, dims)) < 1e-10);
        // The library's brute-force oracle used by the `oracle` command agrees too.
        CHECK(max_abs_difference(got, oracle_rewards(groups, cfg, stage, dims)) < 1e-10);
    }
}

TEST_CASE("every breakdown satisfies the decomposition identity")
{
    test::Rng rng(34);
    const RunConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        const auto groups = test::random_batch(rng, 5, 6, 5);
        const Stage stage = rng.chance(0.5) ? Stage::Explore : Stage::Stabilize;
        for (const auto& row : score_batch(groups, cfg, stage, 5))
            for (const auto& r : row) {
                const double identity = r.r_format + cfg.alpha * r.r_loc +
                                        (1 - cfg.alpha) * (cfg.beta1 * r.r_pair + cfg.beta2 * r.r_tri) -
                                        r.r_std_penalty;
                CHECK(std::fabs(r.r_total - identity) < 1e-12);
                CHECK(r.r_std_penalty >= 0.0);
                if (stage == Stage::Stabilize)
                    CHECK(r.r_std_penalty == 0.0);
                if (r.r_loc != 0.0) {
                    CHECK(r.r_loc > 0.0);
                    CHECK(r.r_loc <= 1.0);
                }
                if (r.r_tri != 0.0) {
                    CHECK(r.r_tri >= 0.3 - 1e-15);
                    CHECK(r.r_tri <= 1.0 + 1e-15);
                }
            }
    }
}

TEST_CASE("malformed generations earn nothing but stay in the group")
{
    std::vector<SampleGroup> groups{
        make_sample_group("a", 2.0, {},
                          {test::gen_of({2, 2, 2, 2, 2}), Generation::malformed(std::string("x")),
                           test::gen_of({2.5, 2, 1.5, 2, 2}), test::gen_of({3, 3, 2, 2, 1})}),
        make_sample_group("b", 4.0, {}, {test::gen_of({4, 4, 4, 4, 4}), test::gen_of({5, 4, 3, 4, 4})}),
    };
    const auto r = score_batch(groups, RunConfig{}, Stage::Explore, 5);
    const auto& bad = r[0][1];
    CHECK(bad.r_format == 0.0);
    CHECK(bad.r_loc == 0.0);
    CHECK(bad.r_pair == 0.0);
    CHECK(bad.r_tri == 0.0);
    CHECK(bad.r_total == 0.0);
    CHECK(bad.advantage < 0.0);
    // Sample b has two valid generations: no triplets, so no response reward.
    CHECK(r[1][0].r_loc == 0.0);
    CHECK(r[0][0].r_loc > 0.0);
}

TEST_CASE("score_batch rejects a dimension mismatch")
{
    std::vector<SampleGroup> groups{make_sample_group("a", 2.0, {}, {test::gen_of({2, 2})})};
    CHECK_THROWS_AS(score_batch(groups, RunConfig{}, Stage::Explore, 5), Error);
}
