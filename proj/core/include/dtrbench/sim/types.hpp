#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dtrbench::sim {

inline constexpr int kControlIntervalMin = 15;
inline constexpr int kStepsPerEpisode = 64;
inline constexpr int kEpisodeMinutes = kControlIntervalMin * kStepsPerEpisode;  // 960
inline constexpr int kObservationWindow = 16;
inline constexpr int kObservationSize = 3 * kObservationWindow;  // 48
inline constexpr double kMaxRate = 9.0;                          // U/h
inline constexpr double kHypoTermination = 40.0;                 // mg/dL
inline constexpr double kHyperTermination = 500.0;               // mg/dL

/// Glucose band the controller is asked to hold (prompt objective).
struct GlucoseBand {
  double low;
  double high;
};
inline constexpr GlucoseBand kControlTarget{70.0, 140.0};
/// Band counted by the time-in-range metric.
inline constexpr GlucoseBand kTimeInRange{70.0, 180.0};

enum class Cohort { Adult, Adolescent, Child };
inline constexpr std::array<Cohort, 3> kAllCohorts{Cohort::Adult, Cohort::Adolescent,
                                                   Cohort::Child};

std::string_view to_string(Cohort c);
Cohort parse_cohort(std::string_view name);

/// Wall-clock time of day as minutes since midnight plus a day counter (day 1 = first day).
struct ClockTime {
  int day = 1;
  int minute_of_day = 5 * 60;

  ClockTime advanced(int minutes) const;
  std::string hms() const;  // "05:15:00"
  friend bool operator==(const ClockTime&, const ClockTime&) = default;
};

struct PatientParams {
  Cohort cohort = Cohort::Adult;
  int patient_id = 0;
  double v_g = 0;          // glucose distribution volume (dL)
  double s_i = 0;          // insulin sensitivity
  double p1 = 0;           // glucose self-regulation rate (1/min)
  double p2 = 0;           // insulin-action decay rate (1/min)
  double tau_sc = 0;       // subcutaneous absorption time constant (min)
  double v_i = 0;          // insulin distribution volume (L)
  double k_abs = 0;        // carbohydrate absorption rate (1/min)
  double f_bio = 0;        // meal bioavailability
  double g_b = 0;          // basal glucose (mg/dL)
  double noise_sigma = 0;  // process noise (mg/dL per sqrt-min)
  double cgm_sigma = 0;    // sensor noise std (mg/dL)

  /// Throws ContractViolation if any invariant is broken.
  void validate() const;
};

struct PatientState {
  double g = 0;      // plasma glucose (mg/dL)
  double s1 = 0;     // subcutaneous insulin, first compartment (U)
  double s2 = 0;     // subcutaneous insulin, second compartment (U)
  double x = 0;      // remote insulin action (1/min)
  double q_gut = 0;  // carbohydrate in the gut (g)
  double t_elapsed = 0;
  ClockTime clock;

  friend bool operator==(const PatientState&, const PatientState&) = default;
};

struct MealEvent {
  double time_offset = 0;  // minutes from episode start
  double carbs = 0;        // grams
};

struct MealJitter {
  bool enabled = true;
  double time_minutes = 30.0;  // uniform +/- shift
  double carb_fraction = 0.2;  // uniform +/- relative change
};

struct Scenario {
  Cohort cohort = Cohort::Adult;
  int patient_id = 0;
  std::vector<MealEvent> meal_schedule;
  std::pair<double, double> initial_bg_range{120.0, 180.0};
  ClockTime episode_start_clock{1, 5 * 60};
  MealJitter jitter;

  void validate() const;
  std::string id() const;  // e.g. "child#0"
};

/// One sample of the episode: glucose measured at `clock`, plus the insulin delivered during the
/// control interval that ended at this sample (zero for the initial measurement).
struct HistoryEntry {
  int step = 0;
  ClockTime clock;
  double glucose_sensor = 0;
  double glucose_true = 0;
  double rate = 0;        // U/h
  double dose = 0;        // U delivered over the interval: rate / 4
  double meal_carbs = 0;  // carbohydrate ingested during the interval
  double reward = 0;      // reward of the step that produced this sample
  bool terminated = false;
  bool truncated = false;
};

using EpisodeHistory = std::vector<HistoryEntry>;

struct ObservationRow {
  double glucose = 0;
  double insulin_rate = 0;
  double insulin_dose = 0;
};

struct Observation {
  std::array<ObservationRow, kObservationWindow> window{};
  std::array<ClockTime, kObservationWindow> timestamps{};
  std::array<double, kObservationSize> flat{};  // chronological, most recent last
};

struct StepInfo {
  double bg_true = 0;
  double risk_index = 0;
  double meal_carbs = 0;
};

struct StepResult {
  Observation observation;
  double reward = 0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

}  // namespace dtrbench::sim
