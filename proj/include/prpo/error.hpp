#pragma once

#include <stdexcept>
#include <string>

namespace prpo {

enum class ErrorCode {
    OutOfRange,
    WrongArity,
    TooFewGenerations,
    NoValidGenerations,
    RankUnavailable,
    BatchTooSmall,
    Overflow,
    ShapeMismatch,
    NonFiniteGradient,
    BadArgument,
    DegenerateInput,
    ParseError,
    UnknownKey,
    InvalidValue,
    IoError,
    RecordError,
};

const char* to_string(ErrorCode code) noexcept;

// Validation errors are caused by bad input; the CLI maps them to exit code 1.
// Everything else is a runtime failure (exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace prpo
