#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "dtrbench/random.hpp"
#include "dtrbench/sim/environment.hpp"

namespace dtrbench::rl {

enum class EnvGroup { Adult, Adolescent, Child, Mixed };

std::string_view to_string(EnvGroup g);
EnvGroup parse_env_group(std::string_view name);

/// Patients trained on by a group. Mixed interleaves the cohorts: adult#0, adolescent#0,
/// child#0, adult#1, ...
std::vector<std::pair<sim::Cohort, int>> group_members(EnvGroup group);

struct EpisodeSummary {
  double total_return = 0;
  int steps = 0;
  bool terminated = false;
  bool hypoglycemia = false;   // ended below 40 mg/dL
  bool hyperglycemia = false;  // ended above 500 mg/dL
};

/// Steps one environment at a time, moving to the next patient of the group (and a fresh
/// derived seed) whenever an episode ends.
class TrainingEnv {
 public:
  TrainingEnv(EnvGroup group, std::uint64_t seed, sim::EnvOptions options = {});

  const sim::Observation& observation() const { return observation_; }

  struct Outcome {
    sim::StepResult result;                 // result.observation is the post-step observation
    std::optional<EpisodeSummary> finished;  // set when this step ended the episode
  };
  /// After an episode ends the environment is reset and observation() refers to the new episode.
  Outcome step(double rate);

  const sim::GlucoseEnv& env() const { return env_; }
  std::uint64_t episodes_started() const { return episodes_started_; }
  std::uint64_t total_steps() const { return total_steps_; }

 private:
  void start_episode();

  EnvGroup group_;
  std::vector<std::pair<sim::Cohort, int>> members_;
  std::uint64_t seed_;
  sim::EnvOptions options_;
  sim::GlucoseEnv env_;
  sim::Observation observation_;
  std::uint64_t episodes_started_ = 0;
  std::uint64_t total_steps_ = 0;
  EpisodeSummary running_;
};

using ActionFn = std::function<double(const sim::Observation&, Rng&)>;

/// Mean normalized return of one noisy episode per patient of the group, with seeds derived
/// from `seed`. Used to score per-epoch checkpoints in their training environment.
double evaluate_in_group(const ActionFn& policy, EnvGroup group, std::uint64_t seed);

}  // namespace dtrbench::rl
