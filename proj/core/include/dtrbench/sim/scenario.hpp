#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dtrbench/random.hpp"
#include "dtrbench/sim/types.hpp"

namespace dtrbench::sim {

/// Breakfast 07:00, lunch 12:00 and a 15:00 snack (45/60/20 g scaled by cohort: child 0.6,
/// adolescent 0.8, adult 1.0), with per-seed jitter of +/-30 min and +/-20% carbs.
Scenario default_scenario(Cohort cohort, int patient_id);

double cohort_carb_factor(Cohort cohort);

/// Meal list actually used by one episode after jitter. Times stay in [0, 960) and in order.
std::vector<MealEvent> realize_meals(const Scenario& scenario, Rng& rng);

/// A scenario file: the scenario plus the seeds it should be evaluated with.
struct ScenarioFile {
  Scenario scenario;
  std::vector<std::uint64_t> seeds;
};

/// YAML schema:
///   cohort: child                # adult | adolescent | child
///   patient_id: 0
///   start_clock: "05:00"
///   initial_bg_range: [120, 180]
///   meals:
///     - {time: 120, carbs: 27}
///   jitter: {enabled: true, time_minutes: 30, carb_fraction: 0.2}
///   seeds: [1, 100, 1000, 10000]
/// Missing `meals` falls back to the default schedule for the cohort.
ScenarioFile load_scenario_file(const std::filesystem::path& path);
ScenarioFile parse_scenario_yaml(const std::string& text);

ClockTime parse_clock(std::string_view hh_mm);

}  // namespace dtrbench::sim
