#pragma once

#include <optional>
#include <string_view>

#include "dtrbench/llm/prompts.hpp"

namespace dtrbench::llm {

enum class ParseStatus { Ok, Clamped, Unparseable };

std::string_view to_string(ParseStatus s);
ParseStatus parse_parse_status(std::string_view name);

struct ParseResult {
  std::optional<double> dose;  // present iff status != Unparseable
  ParseStatus status = ParseStatus::Unparseable;
  bool tail_fallback = false;  // CoT reply had no answer tag; the tail was scanned instead
};

inline constexpr std::size_t kCotTailWindow = 200;

/// First numeric literal (integer or decimal, optional leading minus) anywhere in the text.
ParseResult parse_zero_shot(std::string_view text);

/// Content of the last <ans>...</ans> span, which must be exactly one numeric literal.
/// Without any tag, parse_zero_shot over the last 200 characters.
ParseResult parse_cot(std::string_view text);

/// Clamp into [0, 9]. Status Clamped when the value moved; Unparseable when not finite.
ParseResult clamp_action(double dose);

/// Kind-appropriate parse followed by clamping.
ParseResult parse_reply(PromptKind kind, std::string_view text);

}  // namespace dtrbench::llm
