#include "doctest.h"

#include "dtrbench/errors.hpp"
#include "dtrbench/sim/scenario.hpp"

using namespace dtrbench;
using sim::Cohort;

TEST_CASE("default meals are scaled by cohort and jittered within bounds") {
  const auto sc = sim::default_scenario(Cohort::Child, 0);
  REQUIRE(sc.meal_schedule.size() == 3);
  CHECK(sc.meal_schedule[0].time_offset == 120);
  CHECK(sc.meal_schedule[0].carbs == doctest::Approx(45 * 0.6));
  CHECK(sc.id() == "child#0");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto meals = sim::realize_meals(sc, rng);
    REQUIRE(meals.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(meals[i].time_offset - sc.meal_schedule[i].time_offset) <= 30.0);
      CHECK(meals[i].carbs >= sc.meal_schedule[i].carbs * 0.8 - 1e-9);
      CHECK(meals[i].carbs <= sc.meal_schedule[i].carbs * 1.2 + 1e-9);
      if (i) CHECK(meals[i].time_offset > meals[i - 1].time_offset);
    }
  }
}

TEST_CASE("scenario yaml") {
  const auto f = sim::parse_scenario_yaml(R"(
cohort: adolescent
patient_id: 2
start_clock: "06:30"
initial_bg_range: [130, 150]
meals:
  - {time: 60, carbs: 40}
  - {time: 300, carbs: 10}
jitter: {enabled: false}
seeds: [1, 2]
)");
  CHECK(f.scenario.cohort == Cohort::Adolescent);
  CHECK(f.scenario.patient_id == 2);
  CHECK(f.scenario.episode_start_clock.minute_of_day == 390);
  CHECK(f.scenario.meal_schedule.size() == 2);
  CHECK_FALSE(f.scenario.jitter.enabled);
  CHECK(f.seeds == std::vector<std::uint64_t>{1, 2});

  const auto d = sim::parse_scenario_yaml("cohort: child\npatient_id: 1\n");
  CHECK(d.scenario.meal_schedule.size() == 3);

  CHECK_THROWS_AS(sim::parse_scenario_yaml("cohort: [oops"), FormatError);
  CHECK_THROWS_AS(sim::parse_scenario_yaml("cohort: child\npatient_id: 9\n"), FormatError);
  CHECK_THROWS_AS(sim::load_scenario_file("/nonexistent/x.yaml"), IoError);
  CHECK_THROWS_AS(sim::parse_clock("25:00"), FormatError);
}

TEST_CASE("clock arithmetic rolls over days") {
  sim::ClockTime c{1, 23 * 60 + 45};
  const auto n = c.advanced(30);
  CHECK(n.day == 2);
  CHECK(n.hms() == "00:15:00");
  CHECK(sim::ClockTime{}.hms() == "05:00:00");
}
