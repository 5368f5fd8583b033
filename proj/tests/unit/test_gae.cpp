#include "doctest.h"

#include <cmath>
#include <numeric>

#include "dtrbench/errors.hpp"
#include "dtrbench/random.hpp"
#include "dtrbench/rl/gae.hpp"
#include "oracles.hpp"

using namespace dtrbench;

TEST_CASE("gae matches brute-force sums") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    std::vector<double> r(n), v(n), nv(n);
    std::vector<bool> end(n);
    bool ends[6];
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = uniform(rng, -2, 2);
      v[i] = uniform(rng, -2, 2);
      nv[i] = uniform_index(rng, 4) == 0 ? 0.0 : uniform(rng, -2, 2);
      end[i] = ends[i] = i + 1 == n || uniform_index(rng, 3) == 0;
    }
    const double gamma = uniform(rng, 0.5, 1.0), lambda = uniform(rng, 0, 1);
    const auto ref = oracle::brute_gae(r, v, nv, end, gamma, lambda);
    const auto got = rl::gae(r, v, nv, std::span<const bool>(ends, n), gamma, lambda);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(got.advantages[i] - ref[i]) <= 1e-10);
      CHECK(got.returns[i] == doctest::Approx(ref[i] + v[i]));
    }
  }
}

TEST_CASE("lambda 0 is the one-step td error, lambda 1 the discounted return") {
  std::vector<double> r{1, 2, 3}, v{0, 0, 0}, nv{0, 0, 0};
  bool end[3] = {false, false, true};
  const auto td = rl::gae(r, v, nv, end, 0.9, 0.0);
  CHECK(td.advantages == std::vector<double>{1, 2, 3});
  const auto mc = rl::gae(r, v, nv, end, 0.9, 1.0);
  CHECK(mc.advantages[0] == doctest::Approx(1 + 0.9 * 2 + 0.81 * 3));
}

TEST_CASE("shape mismatch is refused") {
  std::vector<double> r{1, 2}, v{0};
  bool end[2] = {false, true};
  CHECK_THROWS_AS(rl::gae(r, v, r, end, 0.9, 0.9), ContractViolation);
}

TEST_CASE("advantage normalization") {
  std::vector<double> a{1, 2, 3, 4};
  rl::normalize_advantages(a);
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / 4;
  double var = 0;
  for (double x : a) var += (x - mean) * (x - mean);
  CHECK(mean == doctest::Approx(0.0));
  CHECK(var / 4 == doctest::Approx(1.0).epsilon(1e-6));
  std::vector<double> one{5};
  rl::normalize_advantages(one);
  CHECK(one[0] == 0.0);
}
