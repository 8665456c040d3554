#include "prpo/response_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace prpo {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_occurrences(std::string_view text, std::string_view needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::string_view trim(std::string_view s)
{
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

FormatError missing(std::string which)
{
    return FormatError{FormatErrorKind::MissingBlock, std::move(which)};
}

FormatError duplicate(std::string which)
{
    return FormatError{FormatErrorKind::DuplicateBlock, std::move(which)};
}

// Plain decimal literal: optional sign, digits, optional fraction. No exponents, no inf/nan.
bool is_decimal_literal(std::string_view tok)
{
    if (tok.empty())
        return false;
    std::size_t i = 0;
    if (tok[i] == '+' || tok[i] == '-')
        ++i;
    std::size_t int_digits = 0, frac_digits = 0;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
        ++i;
        ++int_digits;
    }
    if (i < tok.size() && tok[i] == '.') {
        ++i;
        while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
            ++i;
            ++frac_digits;
        }
    }
    return i == tok.size() && int_digits + frac_digits > 0;
}

}  // namespace

std::string FormatError::message() const
{
    std::ostringstream out;
    switch (kind) {
    case FormatErrorKind::MissingBlock: out << "MissingBlock(" << which << ")"; break;
    case FormatErrorKind::DuplicateBlock: out << "DuplicateBlock(" << which << ")"; break;
    case FormatErrorKind::BadArity: out << "BadArity(" << expected << ", " << got << ")"; break;
    case FormatErrorKind::BadNumber: out << "BadNumber(" << position << ", '" << which << "')"; break;
    case FormatErrorKind::OutOfRange: out << "OutOfRange(" << position << ", " << value << ")"; break;
    }
    return out.str();
}

ParseOutcome parse_response(std::string_view text, TaskKind task_kind)
{
    const std::size_t think_open = count_occurrences(text, kThinkOpen);
    const std::size_t think_close = count_occurrences(text, kThinkClose);
    if (think_open == 0 || think_close == 0)
        return missing("think");
    if (think_open > 1 || think_close > 1)
        return duplicate("think");

    const std::size_t answer_open = count_occurrences(text, kAnswerOpen);
    const std::size_t answer_close = count_occurrences(text, kAnswerClose);
    if (answer_open == 0 || answer_close == 0)
        return missing("answer");
    if (answer_open > 1 || answer_close > 1)
        return duplicate("answer");

    const auto t_open = text.find(kThinkOpen);
    const auto t_close = text.find(kThinkClose);
    const auto a_open = text.find(kAnswerOpen);
    const auto a_close = text.find(kAnswerClose);
    if (t_close < t_open)
        return missing("think");
    // The answer block must follow a closed think block.
    if (a_close < a_open || a_open < t_close + kThinkClose.size())
        return missing("answer");

    ParsedResponse out;
    out.task_kind = task_kind;
    const auto think_begin = t_open + kThinkOpen.size();
    out.think_text = std::string(text.substr(think_begin, t_close - think_begin));

    const auto payload_begin = a_open + kAnswerOpen.size();
    const std::string_view payload = text.substr(payload_begin, a_close - payload_begin);

    std::vector<std::string_view> tokens;
    std::size_t start = 0;
    while (true) {
        const auto semi = payload.find(';', start);
        if (semi == std::string_view::npos) {
            tokens.push_back(trim(payload.substr(start)));
            break;
        }
        tokens.push_back(trim(payload.substr(start, semi - start)));
        start = semi + 1;
    }

    const std::size_t expected = dims_for(task_kind);
    if (tokens.size() != expected) {
        FormatError err;
        err.kind = FormatErrorKind::BadArity;
        err.expected = expected;
        err.got = tokens.size();
        return err;
    }

    out.answer_scores.reserve(expected);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto tok = tokens[i];
        double value = 0.0;
        bool ok = is_decimal_literal(tok);
        if (ok) {
            // from_chars rejects a leading '+'.
            const auto body = tok.front() == '+' ? tok.substr(1) : tok;
            const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
            ok = ec == std::errc() && ptr == body.data() + body.size();
        }
        if (!ok) {
            FormatError err{FormatErrorKind::BadNumber, std::string(tok)};
            err.position = i;
            return err;
        }
        if (!(value >= kMinScore && value <= kMaxScore)) {
            FormatError err;
            err.kind = FormatErrorKind::OutOfRange;
            err.position = i;
            err.value = value;
            return err;
        }
        out.answer_scores.push_back(value);
    }
    return out;
}

double format_reward(const ParseOutcome& outcome) noexcept
{
    return std::holds_alternative<ParsedResponse>(outcome) ? 1.0 : 0.0;
}

std::string render_response(std::string_view think_text, std::span<const double> scores)
{
    std::string out;
    out.append(kThinkOpen).append(think_text).append(kThinkClose).append(kAnswerOpen);
    char buf[32];
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f", scores[i]);
        if (i)
            out.append("; ");
        out.append(buf);
    }
    out.append(kAnswerClose);
    return out;
}

}  // namespace prpo
