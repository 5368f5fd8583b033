#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dtrbench/sim/types.hpp"

namespace dtrbench::llm {

enum class PromptKind { BaseZeroShot, PriorZeroShot, PriorCot, PriorMealCot };

inline constexpr PromptKind kAllPromptKinds[] = {PromptKind::BaseZeroShot, PromptKind::PriorZeroShot,
                                                 PromptKind::PriorCot, PromptKind::PriorMealCot};

std::string_view to_string(PromptKind k);  // "base", "prior", "cot", "meal-cot"
PromptKind parse_prompt_kind(std::string_view name);
bool is_cot(PromptKind k);

struct ChatMessage {
  std::string role;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// The most recent (up to) 16 samples, one line each:
///   Day 1, Time: 05:15:00, glucose: 148.96 mg/dL, insulin rate: 1.0000 unit/hour, insulin dose: 0.25 unit.
/// With `render_meals`, samples whose interval contained a meal end in ", meal taken."
std::string serialize_observation(const sim::EpisodeHistory& history, bool render_meals = false);

std::string_view system_text(PromptKind k);
std::string_view request_text(PromptKind k);

/// [system, user]. The user message holds the observation block, the request and the answer cue.
std::vector<ChatMessage> build_prompt(PromptKind k, std::string_view observation_text);

/// System and user content joined by a blank line: the full template as one document.
std::string render_prompt(PromptKind k, std::string_view observation_text);

}  // namespace dtrbench::llm
