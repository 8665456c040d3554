#include "prpo/error.hpp"

namespace prpo {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::TooFewGenerations: return "TooFewGenerations";
    case ErrorCode::NoValidGenerations: return "NoValidGenerations";
    case ErrorCode::RankUnavailable: return "RankUnavailable";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::RecordError: return "RecordError";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::Overflow:
    case ErrorCode::NonFiniteGradient:
    case ErrorCode::IoError:
        return false;
    default:
        return true;
    }
}

}  // namespace prpo
