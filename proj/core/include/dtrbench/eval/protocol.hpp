#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dtrbench/eval/policy.hpp"
#include "dtrbench/risk/bootstrap.hpp"
#include "dtrbench/rl/training_log.hpp"
#include "dtrbench/sim/environment.hpp"

namespace dtrbench::eval {

struct EvalProtocol {
  std::vector<sim::Cohort> cohorts{sim::kAllCohorts.begin(), sim::kAllCohorts.end()};
  int patients_per_cohort = 4;
  std::vector<std::uint64_t> seeds{1, 100, 1000, 10000};
  int repeats_per_seed = 5;
  std::size_t bootstrap_resamples = risk::kDefaultResamples;
  std::uint64_t bootstrap_seed = 0;
  sim::EnvOptions env_options;
  // Replaces the default scenario of a (cohort, patient) pair.
  std::vector<sim::Scenario> scenario_overrides;
  int workers = 0;  // 0: hardware concurrency. Does not affect results.

  void validate() const;
  std::size_t episode_count() const;
  sim::Scenario scenario_for(sim::Cohort cohort, int patient_id) const;
  /// Every knob that changes an episode or a summary, in fixed key order.
  std::string canonical_json() const;
  /// 16 hex digits of FNV-1a over canonical_json().
  std::string hash() const;
};

enum class TerminationCause { None, Hypoglycemia, Hyperglycemia };
std::string_view to_string(TerminationCause c);

struct StepSample {
  double bg = 0;  // true glucose after the step
  double action = 0;
  double reward = 0;
};

struct EpisodeRecord {
  std::string scenario_id;
  sim::Cohort cohort = sim::Cohort::Adult;
  int patient_id = 0;
  std::uint64_t seed = 0;
  int repeat = 0;
  std::vector<StepSample> steps;
  TerminationCause termination = TerminationCause::None;
  double episode_return = 0;
  double normalized_return = 0;
  double tir = 0;
  bool survived = false;
  double mean_dosage = 0;  // time-average administered rate, U/h
  int fallback_actions = 0;
  bool failed = false;
  std::string error;
};

/// Episode stream seed for (seed, repeat).
std::uint64_t episode_seed(std::uint64_t seed, int repeat);

/// Plays one episode. Exceptions from the policy or simulator are captured in the record.
EpisodeRecord run_episode(const Policy& policy, const sim::Scenario& scenario, std::uint64_t seed,
                          int repeat, const sim::EnvOptions& options = {});

/// All cohort x patient x seed x repeat episodes, returned in that canonical order regardless
/// of how the worker pool scheduled them. `execution_order_seed` shuffles the schedule.
std::vector<EpisodeRecord> run_protocol(const Policy& policy, const EvalProtocol& protocol,
                                        std::optional<std::uint64_t> execution_order_seed = std::nullopt);

struct StratumMetrics {
  std::string name;  // cohort name or "overall"
  risk::MetricSummary normalized_return;
  risk::MetricSummary tir;
  risk::MetricSummary survival;
  risk::MetricSummary mean_dosage;
  std::size_t episodes = 0;
  std::size_t failed = 0;
  bool complete = true;

  friend bool operator==(const StratumMetrics&, const StratumMetrics&) = default;
};

struct MetricsReport {
  std::string policy;
  std::string protocol_hash;
  std::vector<StratumMetrics> strata;
  StratumMetrics overall;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Bootstrap summaries per stratum and over all records. Failed episodes are excluded from the
/// metrics and mark their stratum incomplete. Invariant under permutation of `records`.
MetricsReport aggregate(std::vector<EpisodeRecord> records, const EvalProtocol& protocol,
                        const std::string& policy_identity);

/// 1-based epoch with the highest normalized training return; ties go to the earliest.
int select_best_checkpoint(const rl::TrainingLog& log);

}  // namespace dtrbench::eval
