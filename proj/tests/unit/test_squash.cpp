#include "doctest.h"

#include <cmath>

#include "dtrbench/errors.hpp"
#include "dtrbench/random.hpp"
#include "dtrbench/rl/squash.hpp"
#include "oracles.hpp"

using namespace dtrbench;
using namespace dtrbench::rl;

TEST_CASE("squash and unsquash are inverse") {
  for (double z = -4; z <= 4; z += 0.25) CHECK(unsquash_tanh(squash_tanh(z)) == doctest::Approx(z));
  CHECK(squash_tanh(0.0) == 4.5);
  CHECK_THROWS_AS(unsquash_tanh(0.0), DomainError);
  CHECK_THROWS_AS(unsquash_tanh(9.0), DomainError);
  CHECK(act_clip(5.0) == 9.0);
  CHECK(act_clip(-5.0) == 0.0);
  CHECK(act_clip(0.0) == 4.5);
}

TEST_CASE("stable log(1 - tanh^2)") {
  for (double z : {-3.0, -0.5, 0.0, 0.1, 2.0, 8.0}) {
    const double t = std::tanh(z);
    CHECK(log_one_minus_tanh_sq(z) == doctest::Approx(std::log(1 - t * t)).epsilon(1e-10));
  }
  CHECK(std::isfinite(log_one_minus_tanh_sq(50.0)));
  CHECK(log_one_minus_tanh_sq(50.0) == doctest::Approx(2 * (std::log(2.0) - 50.0)));
}

TEST_CASE("squashed density integrates to one") {
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    const double mu = uniform(rng, -2, 2), sigma = uniform(rng, 0.2, 1.5);
    // substitute a = squash(z): integrate over z to avoid the endpoint singularities
    auto integrand = [&](double z) {
      const double dadz = 4.5 * (1 - std::tanh(z) * std::tanh(z));
      return std::exp(log_prob_tanh_from_logit(z, mu, sigma)) * dadz;
    };
    CHECK(oracle::simpson(integrand, mu - 12 * sigma, mu + 12 * sigma, 4000) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("log_prob_tanh gradient agrees with central differences") {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const double a = uniform(rng, 0.05, 8.95), mu = uniform(rng, -2, 2), s = uniform(rng, 0.2, 2);
    const auto g = log_prob_tanh_grad(a, mu, s);
    CHECK(g.value == doctest::Approx(log_prob_tanh(a, mu, s)));
    const double dmu = oracle::central_diff([&](double m) { return log_prob_tanh(a, m, s); }, mu, 1e-5);
    const double ds = oracle::central_diff([&](double x) { return log_prob_tanh(a, mu, x); }, s, 1e-5);
    CHECK(g.d_mu == doctest::Approx(dmu).epsilon(1e-6));
    CHECK(g.d_sigma == doctest::Approx(ds).epsilon(1e-6));
  }
}

TEST_CASE("transform log-probs") {
  CHECK(transform_log_prob(ActionTransform::Clip, 0.3, 0.1, 0.5) ==
        doctest::Approx(gaussian_log_prob(0.3, 0.1, 0.5)));
  CHECK(transform_log_prob(ActionTransform::Tanh, 0.3, 0.1, 0.5) ==
        doctest::Approx(log_prob_tanh_from_logit(0.3, 0.1, 0.5)));
  CHECK(gaussian_log_prob(0, 0, 1) == doctest::Approx(-0.5 * std::log(2 * M_PI)));
  CHECK(apply_transform(ActionTransform::Tanh, 0.0) == 4.5);
  CHECK(parse_action_transform("clip") == ActionTransform::Clip);
  CHECK(to_string(ActionTransform::Tanh) == "tanh");
  CHECK_THROWS(parse_action_transform("sigmoid"));
}

TEST_CASE("offset that maps a zero logit to half a unit per hour") {
  const double off = tanh_offset_for_rate(0.5);
  CHECK(off == doctest::Approx(-1.4166).epsilon(1e-4));
  CHECK(squash_tanh(off) == doctest::Approx(0.5));
}
