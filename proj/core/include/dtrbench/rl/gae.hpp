#pragma once

#include <span>
#include <vector>

namespace dtrbench::rl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// Generalized advantage estimation.
///   delta_t = r_t + gamma * next_value_t - value_t
///   A_t     = delta_t + gamma * lambda * (1 - episode_end_t) * A_{t+1}
/// next_value_t is V(s_{t+1}), or 0 when step t terminated; episode_end_t marks any break in
/// the chain (termination, truncation, or the end of the buffer).
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const double> next_values, std::span<const bool> episode_end,
              double gamma, double lambda);

/// In place: zero mean, unit (population) standard deviation. A single element becomes 0.
void normalize_advantages(std::vector<double>& adv);

}  // namespace dtrbench::rl
