#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prpo/qa_types.hpp"

namespace prpo {

struct ParsedResponse {
    std::string think_text;
    std::vector<double> answer_scores;
    TaskKind task_kind = TaskKind::Iqa;
};

enum class FormatErrorKind { MissingBlock, DuplicateBlock, BadArity, BadNumber, OutOfRange };

struct FormatError {
    FormatErrorKind kind = FormatErrorKind::MissingBlock;
    // MissingBlock / DuplicateBlock: "think" or "answer". BadNumber: offending token.
    std::string which;
    std::size_t expected = 0;
    std::size_t got = 0;
    std::size_t position = 0;
    double value = 0.0;

    std::string message() const;
};

using ParseOutcome = std::variant<ParsedResponse, FormatError>;

/// Accepts exactly one `<think>...</think>` followed by exactly one
/// `<answer>s1; s2; ...</answer>`, with 5 scores for IQA and 2 for VQA.
/// Tags are case-sensitive; whitespace around tags and tokens is ignored.
ParseOutcome parse_response(std::string_view text, TaskKind task_kind);

/// 1.0 for a successful parse, 0.0 otherwise.
double format_reward(const ParseOutcome& outcome) noexcept;

/// Renders the answer template with scores printed at two decimals.
std::string render_response(std::string_view think_text, std::span<const double> scores);

}  // namespace prpo
