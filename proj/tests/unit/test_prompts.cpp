#include "doctest.h"

#include <fstream>
#include <sstream>

#include "dtrbench/errors.hpp"
#include "dtrbench/llm/prompts.hpp"
#include "dtrbench/sim/environment.hpp"
#include "dtrbench/sim/scenario.hpp"

using namespace dtrbench;
using namespace dtrbench::llm;

namespace {

std::string golden(PromptKind k) {
  std::ifstream in(std::string(DTRBENCH_GOLDEN_DIR) + "/prompt_" + std::string(to_string(k)) + ".txt",
                   std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sim::HistoryEntry entry(int step, int minute, double g, double rate, double carbs = 0) {
  sim::HistoryEntry e;
  e.step = step;
  e.clock = {1, minute};
  e.glucose_sensor = g;
  e.rate = rate;
  e.dose = rate / 4;
  e.meal_carbs = carbs;
  return e;
}

}  // namespace

TEST_CASE("rendered templates match the golden files byte for byte") {
  for (PromptKind k : kAllPromptKinds) {
    CAPTURE(to_string(k));
    CHECK(render_prompt(k, "<Observation>") == golden(k));
  }
}

TEST_CASE("prompt structure") {
  const auto base = build_prompt(PromptKind::BaseZeroShot, "X");
  REQUIRE(base.size() == 2);
  CHECK(base[0].role == "system");
  CHECK(base[1].role == "user");
  CHECK(base[1].content.ends_with("###Answer"));
  CHECK(base[1].content.starts_with("###Observations\nX\n\n###Request\n"));
  CHECK(std::string(request_text(PromptKind::PriorCot)).find("Let's think step by step") != std::string::npos);
  CHECK(std::string(request_text(PromptKind::PriorMealCot)).find("Total Daily Insulin(TDI)") != std::string::npos);
  CHECK(system_text(PromptKind::PriorZeroShot).starts_with(system_text(PromptKind::BaseZeroShot)));
  CHECK(std::string(system_text(PromptKind::BaseZeroShot)).find("Hidden Variables") == std::string::npos);
  for (PromptKind k : kAllPromptKinds) CHECK(parse_prompt_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_prompt_kind("few-shot"), FormatError);
}

TEST_CASE("splicing only changes the observation slot") {
  for (PromptKind k : kAllPromptKinds) {
    const std::string obs = "Day 1, Time: 05:00:00 (initial measurement), glucose: 1.00 mg/dL";
    std::string expected = golden(k);
    expected.replace(expected.find("<Observation>"), 13, obs);
    CHECK(render_prompt(k, obs) == expected);
  }
}

TEST_CASE("observation lines in the documented format") {
  sim::EpisodeHistory h{entry(0, 300, 159.27, 0.0), entry(1, 315, 148.96, 1.0),
                        entry(2, 330, 149.71, 0.0, 20.0)};
  CHECK(serialize_observation(h) ==
        "Day 1, Time: 05:00:00 (initial measurement), glucose: 159.27 mg/dL, insulin rate: 0.0000 "
        "unit/hour, insulin dose: 0.00 unit.\n"
        "Day 1, Time: 05:15:00, glucose: 148.96 mg/dL, insulin rate: 1.0000 unit/hour, insulin "
        "dose: 0.25 unit.\n"
        "Day 1, Time: 05:30:00, glucose: 149.71 mg/dL, insulin rate: 0.0000 unit/hour, insulin "
        "dose: 0.00 unit.");
  const std::string meals = serialize_observation(h, true);
  CHECK(meals.ends_with("insulin dose: 0.00 unit, meal taken."));
  CHECK(meals.find("meal taken") == meals.rfind("meal taken"));
}

TEST_CASE("at most sixteen lines, from the live environment") {
  sim::GlucoseEnv env(sim::default_scenario(sim::Cohort::Child, 0));
  env.reset(1);
  for (int i = 0; i < 20; ++i) env.step(0.5);
  const std::string text = serialize_observation(env.history());
  CHECK(std::count(text.begin(), text.end(), '\n') == 15);
  CHECK(text.find("initial measurement") == std::string::npos);
  CHECK(text.starts_with("Day 1, Time: 06:15:00"));
  CHECK_THROWS_AS(serialize_observation({}), ContractViolation);
}
