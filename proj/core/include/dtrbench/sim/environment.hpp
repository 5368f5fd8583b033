#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dtrbench/random.hpp"
#include "dtrbench/sim/patient.hpp"
#include "dtrbench/sim/scenario.hpp"
#include "dtrbench/sim/types.hpp"

namespace dtrbench::sim {

struct EnvOptions {
  bool process_noise = true;
  bool sensor_noise = true;

  static EnvOptions noiseless() { return {false, false}; }
};

/// Last 16 samples of `history`, padded at the front by repeating the first glucose reading with
/// zero insulin. Per-row dose is rate/4 (one 15-minute interval).
Observation build_observation(const EpisodeHistory& history);

/// Fifteen-minute glucose-insulin control environment. Owns its random stream; not thread-safe,
/// but independent instances may run in parallel.
class GlucoseEnv {
 public:
  explicit GlucoseEnv(Scenario scenario, EnvOptions options = {});
  GlucoseEnv(Scenario scenario, PatientParams params, EnvOptions options = {});

  /// Starts an episode. Identical (scenario, seed) pairs give bit-identical episodes.
  Observation reset(std::uint64_t seed);

  /// Holds `rate` (U/h, must be in [0, 9]) for one control interval.
  StepResult step(double rate);

  const Scenario& scenario() const { return scenario_; }
  const PatientParams& params() const { return params_; }
  const PatientState& state() const { return state_; }
  const EpisodeHistory& history() const { return history_; }
  const std::vector<MealEvent>& meals() const { return meals_; }
  const EnvOptions& options() const { return options_; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }

 private:
  double read_sensor(double bg_true);

  Scenario scenario_;
  PatientParams params_;
  EnvOptions options_;
  Rng rng_;
  PatientState state_;
  std::vector<MealEvent> meals_;
  EpisodeHistory history_;
  int step_count_ = 0;
  bool started_ = false;
  bool done_ = false;
};

}  // namespace dtrbench::sim
