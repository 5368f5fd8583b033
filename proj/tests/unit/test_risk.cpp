#include "doctest.h"

#include <cmath>
#include <vector>

#include "dtrbench/errors.hpp"
#include "dtrbench/risk/risk.hpp"
#include "oracles.hpp"

using namespace dtrbench;

TEST_CASE("risk index matches the long double reference on the whole glucose range") {
  for (int bg = 41; bg <= 499; ++bg) {
    const double ref = static_cast<double>(oracle::risk_index(bg));
    CHECK(risk::risk_index(bg).ri == doctest::Approx(ref).epsilon(1e-12));
    CHECK(risk::step_reward(bg, false) ==
          doctest::Approx(static_cast<double>(oracle::reward(bg, false))).epsilon(1e-12));
  }
}

TEST_CASE("lbgi and hbgi sit on opposite sides of the root") {
  const auto low = risk::risk_index(60);
  CHECK(low.lbgi > 0);
  CHECK(low.hbgi == 0);
  const auto high = risk::risk_index(300);
  CHECK(high.hbgi > 0);
  CHECK(high.lbgi == 0);
}

TEST_CASE("transform is strictly increasing") {
  double prev = risk::bg_transform(1.0);
  for (double bg = 1.5; bg < 1000; bg += 0.5) {
    const double f = risk::bg_transform(bg);
    REQUIRE(f > prev);
    prev = f;
  }
}

TEST_CASE("non-positive glucose is a domain error") {
  CHECK_THROWS_AS(risk::bg_transform(0.0), DomainError);
  CHECK_THROWS_AS(risk::bg_transform(-5.0), DomainError);
  CHECK_THROWS_AS(risk::bg_transform(NAN), DomainError);
}

TEST_CASE("termination adds the penalty and nothing else") {
  for (double bg : {39.0, 30.0, 501.0, 600.0})
    CHECK(risk::step_reward(bg, true) - risk::step_reward(bg, false) == doctest::Approx(-100.0));
  // bg just below the hypo threshold: the risk part alone is well below 1
  CHECK(risk::step_reward(39.0, true) == doctest::Approx(-99.38).epsilon(1e-3));
}

TEST_CASE("normalization endpoints") {
  CHECK(risk::normalized_return(-99.7) == 0.0);
  CHECK(risk::normalized_return(64.0) == 100.0);
  CHECK(risk::normalized_return(-17.85) == doctest::Approx(50.0));
}

TEST_CASE("tir band is inclusive") {
  std::vector<double> bg{69.999, 70.0, 180.0, 180.001};
  CHECK(risk::tir(bg) == doctest::Approx(0.5));
  std::vector<double> empty;
  CHECK_THROWS_AS(risk::tir(empty), ContractViolation);
}

namespace {
struct Ep {
  bool survived;
};
}  // namespace

TEST_CASE("survival rate") {
  std::vector<Ep> eps{{true}, {false}, {true}, {true}};
  CHECK(risk::survival_rate(std::span<const Ep>(eps)) == doctest::Approx(0.75));
}
