#include "dtrbench/sim/scenario.hpp"

#include <fmt/format.h>

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dtrbench/errors.hpp"

namespace dtrbench::sim {

std::string_view to_string(Cohort c) {
  switch (c) {
    case Cohort::Adult: return "adult";
    case Cohort::Adolescent: return "adolescent";
    case Cohort::Child: return "child";
  }
  return "unknown";
}

Cohort parse_cohort(std::string_view name) {
  if (name == "adult") return Cohort::Adult;
  if (name == "adolescent") return Cohort::Adolescent;
  if (name == "child") return Cohort::Child;
  throw ContractViolation("unknown cohort '" + std::string(name) + "'");
}

ClockTime ClockTime::advanced(int minutes) const {
  ClockTime out = *this;
  int total = minute_of_day + minutes;
  while (total >= 24 * 60) {
    total -= 24 * 60;
    ++out.day;
  }
  while (total < 0) {
    total += 24 * 60;
    --out.day;
  }
  out.minute_of_day = total;
  return out;
}

std::string ClockTime::hms() const {
  return fmt::format("{:02d}:{:02d}:00", minute_of_day / 60, minute_of_day % 60);
}

ClockTime parse_clock(std::string_view text) {
  int h = -1, m = -1;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 23 || m < 0 || m > 59) {
    throw FormatError("bad clock time '" + s + "', expected HH:MM");
  }
  return ClockTime{1, h * 60 + m};
}

void Scenario::validate() const {
  require(patient_id >= 0 && patient_id < 4, "scenario patient_id must be in 0..3");
  require(initial_bg_range.first > 0 && initial_bg_range.first <= initial_bg_range.second,
          "initial_bg_range must be positive and ordered");
  double prev = -1.0;
  for (const MealEvent& m : meal_schedule) {
    require(m.time_offset >= 0 && m.time_offset < kEpisodeMinutes,
            "meal time_offset must be in [0, 960)");
    require(m.carbs > 0, "meal carbs must be positive");
    require(m.time_offset > prev, "meal times must be strictly increasing");
    prev = m.time_offset;
  }
  require(jitter.time_minutes >= 0 && jitter.carb_fraction >= 0 && jitter.carb_fraction < 1,
          "jitter magnitudes out of range");
}

std::string Scenario::id() const {
  return std::string(to_string(cohort)) + "#" + std::to_string(patient_id);
}

double cohort_carb_factor(Cohort cohort) {
  switch (cohort) {
    case Cohort::Adult: return 1.0;
    case Cohort::Adolescent: return 0.8;
    case Cohort::Child: return 0.6;
  }
  return 1.0;
}

Scenario default_scenario(Cohort cohort, int patient_id) {
  Scenario s;
  s.cohort = cohort;
  s.patient_id = patient_id;
  const double f = cohort_carb_factor(cohort);
  s.meal_schedule = {{120.0, 45.0 * f}, {420.0, 60.0 * f}, {600.0, 20.0 * f}};
  s.validate();
  return s;
}

std::vector<MealEvent> realize_meals(const Scenario& scenario, Rng& rng) {
  std::vector<MealEvent> meals = scenario.meal_schedule;
  if (!scenario.jitter.enabled) return meals;
  for (MealEvent& m : meals) {
    const double dt = uniform(rng, -scenario.jitter.time_minutes, scenario.jitter.time_minutes);
    const double df = uniform(rng, -scenario.jitter.carb_fraction, scenario.jitter.carb_fraction);
    m.time_offset = std::clamp(m.time_offset + dt, 0.0, kEpisodeMinutes - 1.0);
    m.carbs *= 1.0 + df;
  }
  std::stable_sort(meals.begin(), meals.end(),
                   [](const MealEvent& a, const MealEvent& b) { return a.time_offset < b.time_offset; });
  return meals;
}

ScenarioFile parse_scenario_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("scenario file is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw FormatError("scenario file must be a mapping");
  try {
    const Cohort cohort = parse_cohort(root["cohort"].as<std::string>());
    const int pid = root["patient_id"] ? root["patient_id"].as<int>() : 0;
    ScenarioFile out{default_scenario(cohort, pid), {}};
    Scenario& s = out.scenario;
    if (root["start_clock"]) s.episode_start_clock = parse_clock(root["start_clock"].as<std::string>());
    if (const auto r = root["initial_bg_range"]) {
      if (!r.IsSequence() || r.size() != 2) throw FormatError("initial_bg_range needs two values");
      s.initial_bg_range = {r[0].as<double>(), r[1].as<double>()};
    }
    if (const auto meals = root["meals"]) {
      s.meal_schedule.clear();
      for (const auto& m : meals) {
        s.meal_schedule.push_back({m["time"].as<double>(), m["carbs"].as<double>()});
      }
    }
    if (const auto j = root["jitter"]) {
      if (j["enabled"]) s.jitter.enabled = j["enabled"].as<bool>();
      if (j["time_minutes"]) s.jitter.time_minutes = j["time_minutes"].as<double>();
      if (j["carb_fraction"]) s.jitter.carb_fraction = j["carb_fraction"].as<double>();
    }
    if (const auto seeds = root["seeds"]) {
      for (const auto& v : seeds) out.seeds.push_back(v.as<std::uint64_t>());
    }
    s.validate();
    return out;
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("scenario file has a bad field: ") + e.what());
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("scenario file is invalid: ") + e.what());
  }
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_yaml(ss.str());
}

}  // namespace dtrbench::sim
