#include "dtrbench/sim/environment.hpp"

#include <algorithm>
#include <cmath>

#include "dtrbench/errors.hpp"
#include "dtrbench/risk/risk.hpp"

namespace dtrbench::sim {

Observation build_observation(const EpisodeHistory& history) {
  require(!history.empty(), "observation needs at least one glucose sample");
  Observation obs;
  const int n = static_cast<int>(history.size());
  const int pad = std::max(0, kObservationWindow - n);
  const HistoryEntry& first = history.front();
  for (int row = 0; row < kObservationWindow; ++row) {
    ObservationRow r;
    ClockTime ts;
    if (row < pad) {
      r.glucose = first.glucose_sensor;
      ts = first.clock.advanced(-kControlIntervalMin * (pad - row));
    } else {
      const HistoryEntry& e = history[static_cast<std::size_t>(n - kObservationWindow + row)];
      r.glucose = e.glucose_sensor;
      r.insulin_rate = e.rate;
      r.insulin_dose = e.dose;
      ts = e.clock;
    }
    obs.window[static_cast<std::size_t>(row)] = r;
    obs.timestamps[static_cast<std::size_t>(row)] = ts;
    obs.flat[static_cast<std::size_t>(3 * row)] = r.glucose;
    obs.flat[static_cast<std::size_t>(3 * row + 1)] = r.insulin_rate;
    obs.flat[static_cast<std::size_t>(3 * row + 2)] = r.insulin_dose;
  }
  return obs;
}

GlucoseEnv::GlucoseEnv(Scenario scenario, EnvOptions options)
    : GlucoseEnv(scenario, make_patient(scenario.cohort, scenario.patient_id), options) {}

GlucoseEnv::GlucoseEnv(Scenario scenario, PatientParams params, EnvOptions options)
    : scenario_(std::move(scenario)), params_(params), options_(options) {
  scenario_.validate();
  params_.validate();
}

double GlucoseEnv::read_sensor(double bg_true) {
  if (!options_.sensor_noise || params_.cgm_sigma <= 0.0) return bg_true;
  return std::max(1.0, bg_true + params_.cgm_sigma * standard_normal(rng_));
}

Observation GlucoseEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  const auto [lo, hi] = scenario_.initial_bg_range;
  state_ = PatientState{};
  state_.g = lo == hi ? lo : std::clamp(uniform(rng_, lo, hi), lo, hi);
  state_.clock = scenario_.episode_start_clock;
  meals_ = realize_meals(scenario_, rng_);

  history_.clear();
  HistoryEntry first;
  first.step = 0;
  first.clock = state_.clock;
  first.glucose_true = state_.g;
  first.glucose_sensor = read_sensor(state_.g);
  history_.push_back(first);

  step_count_ = 0;
  started_ = true;
  done_ = false;
  return build_observation(history_);
}

StepResult GlucoseEnv::step(double rate) {
  require(started_, "step() called before reset()");
  require(!done_, "step() called on a finished episode");
  require(std::isfinite(rate) && rate >= 0.0 && rate <= kMaxRate,
          "insulin rate must be a finite value in [0, 9] U/h");

  const double t0 = static_cast<double>(step_count_ * kControlIntervalMin);
  double carbs = 0.0;
  for (const MealEvent& m : meals_) {
    if (m.time_offset >= t0 && m.time_offset < t0 + kControlIntervalMin) carbs += m.carbs;
  }
  if (carbs > 0.0) state_ = apply_meal(state_, carbs);

  Rng* noise = options_.process_noise ? &rng_ : nullptr;
  for (int i = 0; i < kControlIntervalMin; ++i) {
    state_ = step_physiology(state_, params_, rate, 1.0, noise);
  }
  state_.clock = state_.clock.advanced(kControlIntervalMin);
  ++step_count_;

  const double bg = state_.g;
  StepResult result;
  result.terminated = bg < kHypoTermination || bg > kHyperTermination;
  result.truncated = !result.terminated && step_count_ >= kStepsPerEpisode;
  result.reward = risk::step_reward(bg, result.terminated);
  result.info = {bg, risk::risk_index(bg).ri, carbs};

  HistoryEntry e;
  e.step = step_count_;
  e.clock = state_.clock;
  e.glucose_true = bg;
  e.glucose_sensor = read_sensor(bg);
  e.rate = rate;
  e.dose = rate / 60.0 * kControlIntervalMin;
  e.meal_carbs = carbs;
  e.reward = result.reward;
  e.terminated = result.terminated;
  e.truncated = result.truncated;
  history_.push_back(e);

  done_ = result.terminated || result.truncated;
  result.observation = build_observation(history_);
  return result;
}

}  // namespace dtrbench::sim
