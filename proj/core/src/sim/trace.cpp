#include "dtrbench/sim/trace.hpp"

#include <sstream>

#include "json.hpp"

namespace dtrbench::sim {

void write_trace_jsonl(std::ostream& out, const EpisodeHistory& history) {
  for (const HistoryEntry& e : history) {
    nlohmann::ordered_json j;
    j["t"] = e.step * kControlIntervalMin;
    j["clock"] = "Day " + std::to_string(e.clock.day) + " " + e.clock.hms();
    j["bg_true"] = e.glucose_true;
    j["bg_sensor"] = e.glucose_sensor;
    j["rate"] = e.rate;
    j["dose"] = e.dose;
    j["reward"] = e.reward;
    j["terminated"] = e.terminated;
    j["truncated"] = e.truncated;
    j["meal_carbs"] = e.meal_carbs;
    out << j.dump() << '\n';
  }
}

std::string trace_jsonl(const EpisodeHistory& history) {
  std::ostringstream ss;
  write_trace_jsonl(ss, history);
  return ss.str();
}

}  // namespace dtrbench::sim
