#include "doctest.h"

#include <cmath>
#include <string>

#include "dtrbench/errors.hpp"
#include "dtrbench/llm/parse.hpp"

using namespace dtrbench::llm;

TEST_CASE("zero-shot takes the first numeral") {
  CHECK(parse_zero_shot("3.5").dose.value() == 3.5);
  CHECK(parse_zero_shot("I recommend 2 units/hour, maybe 3").dose.value() == 2.0);
  CHECK(parse_zero_shot("  .75").dose.value() == 0.75);
  CHECK(parse_zero_shot("-1").dose.value() == -1.0);
  const auto none = parse_zero_shot("no dose needed");
  CHECK(none.status == ParseStatus::Unparseable);
  CHECK_FALSE(none.dose.has_value());
}

TEST_CASE("cot takes the last tagged answer") {
  CHECK(parse_cot("The rate decreases... so the final rate is <ans>2.84</ans>").dose.value() == doctest::Approx(2.84));
  CHECK(parse_cot("<ans>1</ans> wait, actually <ans>3</ans>").dose.value() == 3.0);
  CHECK(parse_cot("<ans> 4 </ans>").dose.value() == 4.0);
  CHECK(parse_cot("<ans>two</ans>").status == ParseStatus::Unparseable);
  CHECK(parse_cot("<ans>1 or 2</ans>").status == ParseStatus::Unparseable);
  const auto tail = parse_cot("long reasoning ... I'd go with 1.5 units per hour");
  CHECK(tail.dose.value() == 1.5);
  CHECK(tail.tail_fallback);
  CHECK(parse_cot("nothing numeric").status == ParseStatus::Unparseable);
}

TEST_CASE("tail fallback only sees the last 200 characters") {
  const std::string text = "dose 5 " + std::string(250, 'x');
  CHECK(parse_cot(text).status == ParseStatus::Unparseable);
  CHECK(parse_zero_shot(text).dose.value() == 5.0);
}

TEST_CASE("single tag: cot agrees with zero-shot on the inner content") {
  for (const char* inner : {"0", "2.5", "8", "130.67", ".5"}) {
    CHECK(parse_cot(std::string("<ans>") + inner + "</ans>").dose == parse_zero_shot(inner).dose);
  }
}

TEST_CASE("clamping") {
  const auto big = clamp_action(130.67);
  CHECK(big.dose.value() == 9.0);
  CHECK(big.status == ParseStatus::Clamped);
  CHECK(clamp_action(-1).dose.value() == 0.0);
  const auto ok = clamp_action(4.39);
  CHECK(ok.dose.value() == 4.39);
  CHECK(ok.status == ParseStatus::Ok);
  CHECK(clamp_action(NAN).status == ParseStatus::Unparseable);
  CHECK(clamp_action(INFINITY).status == ParseStatus::Unparseable);
  for (double x = -20; x < 20; x += 0.37) {
    const double once = clamp_action(x).dose.value();
    CHECK(once >= 0.0);
    CHECK(once <= 9.0);
    CHECK(clamp_action(once).dose.value() == once);
  }
}

TEST_CASE("parse_reply dispatches on kind and clamps") {
  const auto r = parse_reply(PromptKind::BaseZeroShot, "130.67");
  CHECK(r.dose.value() == 9.0);
  CHECK(r.status == ParseStatus::Clamped);
  CHECK(parse_reply(PromptKind::PriorCot, "x <ans>2.84</ans>").dose.value() == doctest::Approx(2.84));
  CHECK(parse_reply(PromptKind::PriorMealCot, "junk").status == ParseStatus::Unparseable);
}
