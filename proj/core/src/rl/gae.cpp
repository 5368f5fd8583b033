#include "dtrbench/rl/gae.hpp"

#include <cmath>

#include "dtrbench/errors.hpp"

namespace dtrbench::rl {

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const double> next_values, std::span<const bool> episode_end,
              double gamma, double lambda) {
  const std::size_t n = rewards.size();
  require(values.size() == n && next_values.size() == n && episode_end.size() == n,
          "gae inputs must have equal lengths");
  require(gamma >= 0.0 && gamma <= 1.0 && lambda >= 0.0 && lambda <= 1.0,
          "gamma and lambda must be in [0, 1]");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    if (episode_end[i]) running = 0.0;
    const double delta = rewards[i] + gamma * next_values[i] - values[i];
    running = delta + gamma * lambda * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double sd = std::sqrt(var) + 1e-8;
  for (double& a : adv) a = (a - mean) / sd;
}

}  // namespace dtrbench::rl
