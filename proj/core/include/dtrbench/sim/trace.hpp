#pragma once

#include <ostream>
#include <string>

#include "dtrbench/sim/types.hpp"

namespace dtrbench::sim {

/// One JSON object per sample with fields
/// t, clock, bg_true, bg_sensor, rate, dose, reward, terminated, truncated, meal_carbs.
void write_trace_jsonl(std::ostream& out, const EpisodeHistory& history);
std::string trace_jsonl(const EpisodeHistory& history);

}  // namespace dtrbench::sim
