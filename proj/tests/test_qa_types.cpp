#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "prpo/error.hpp"
#include "prpo/qa_types.hpp"

using namespace prpo;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::BadArgument;
}

}  // namespace

TEST_CASE("score vector accepts interior and boundary values")
{
    const std::vector<double> mid{3.0, 3.0, 3.0, 3.0, 3.0};
    const auto a = ScoreVector::validate(mid);
    CHECK(a.size() == 5);
    CHECK(a.mean() == 3.0);

    const std::vector<double> edges{1.0, 5.0, 1.0, 5.0, 3.2};
    const auto b = ScoreVector::validate(edges);
    for (std::size_t d = 0; d < 5; ++d)
        CHECK(b[d] == edges[d]);
}

TEST_CASE("score vector rejects out-of-range entries without clamping")
{
    const std::vector<double> low{0.9, 3, 3, 3, 3};
    try {
        ScoreVector::validate(low);
        FAIL("accepted 0.9");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
        CHECK(std::string(e.what()).find("0.9") != std::string::npos);
    }
    const std::vector<double> high{3, 3, 3, 3, 5.0000001};
    CHECK(code_of([&] { ScoreVector::validate(high); }) == ErrorCode::OutOfRange);
    const std::vector<double> nan{3, std::nan(""), 3, 3, 3};
    CHECK(code_of([&] { ScoreVector::validate(nan); }) == ErrorCode::OutOfRange);
}

TEST_CASE("score vector arity follows the task")
{
    const std::vector<double> four{3, 3, 3, 3};
    CHECK(code_of([&] { ScoreVector::validate(four); }) == ErrorCode::WrongArity);
    const std::vector<double> two{4.0, 3.5};
    CHECK(ScoreVector::validate(two, kVqaDims).size() == 2);
    CHECK(code_of([&] { ScoreVector::validate(two); }) == ErrorCode::WrongArity);
}

TEST_CASE("population std divides by the dimension count")
{
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(ScoreVector::validate(v).population_std() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("generations and groups validate on construction")
{
    const std::vector<double> s{3, 3, 3, 3, 3};
    CHECK(code_of([&] { Generation::valid(ScoreVector::validate(s), INFINITY); }) == ErrorCode::InvalidValue);

    const auto ok = Generation::valid(ScoreVector::validate(s), -1.5, 2);
    const auto bad = Generation::malformed(std::string("garbage"));
    CHECK(ok.format_valid);
    CHECK_FALSE(bad.format_valid);
    CHECK_FALSE(bad.scores.has_value());

    const auto group = make_sample_group("x", 2.5, {}, {ok, bad, ok});
    CHECK(group.size() == 3);
    CHECK(group.valid_count() == 2);

    CHECK(code_of([&] { make_sample_group("x", 5.5, {}, {ok}); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { make_sample_group("x", 3.0, {}, {ok, ok}, 3); }) == ErrorCode::ShapeMismatch);

    auto inconsistent = ok;
    inconsistent.format_valid = false;
    CHECK(code_of([&] { make_sample_group("x", 3.0, {}, {inconsistent}); }) == ErrorCode::BadArgument);
}

TEST_CASE("mos normalization is a linear map onto the score range")
{
    CHECK(normalize_mos(0.0, 0.0, 100.0) == 1.0);
    CHECK(normalize_mos(100.0, 0.0, 100.0) == 5.0);
    CHECK(normalize_mos(25.0, 0.0, 100.0) == doctest::Approx(2.0));
    CHECK(code_of([] { normalize_mos(1.0, 2.0, 2.0); }) == ErrorCode::BadArgument);
}

TEST_CASE("run config defaults and bounds")
{
    RunConfig cfg;
    CHECK(cfg.alpha == 0.5);
    CHECK(cfg.beta1 == 0.375);
    CHECK(cfg.beta2 == 0.125);
    CHECK(cfg.k_stage1 == 12);
    CHECK(cfg.k_stage2 == 6);
    CHECK(cfg.prompt_count == 5);
    CHECK(cfg.delta_min == 0.5);
    CHECK(cfg.lambda_std == 0.5);
    CHECK_NOTHROW(cfg.validate());

    auto broken = cfg;
    broken.alpha = 1.5;
    CHECK(code_of([&] { broken.validate(); }) == ErrorCode::InvalidValue);
    broken = cfg;
    broken.gamma = 0.0;
    CHECK(code_of([&] { broken.validate(); }) == ErrorCode::InvalidValue);
    broken = cfg;
    broken.batch_size = 1;
    CHECK(code_of([&] { broken.validate(); }) == ErrorCode::InvalidValue);
    broken = cfg;
    broken.stage1_steps = -1;
    CHECK(code_of([&] { broken.validate(); }) == ErrorCode::InvalidValue);
}

TEST_CASE("exit-code classes of error codes")
{
    CHECK(is_validation_error(ErrorCode::InvalidValue));
    CHECK(is_validation_error(ErrorCode::DegenerateInput));
    CHECK_FALSE(is_validation_error(ErrorCode::IoError));
    CHECK_FALSE(is_validation_error(ErrorCode::NonFiniteGradient));
    CHECK_FALSE(is_validation_error(ErrorCode::Overflow));
}
