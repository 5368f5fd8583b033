#include "dtrbench/rl/features.hpp"

namespace dtrbench::rl {

Eigen::VectorXd observation_features(const FlatObservation& flat) {
  Eigen::VectorXd x(sim::kObservationSize);
  for (int row = 0; row < sim::kObservationWindow; ++row) {
    x(3 * row) = (flat[static_cast<std::size_t>(3 * row)] - 140.0) / 100.0;
    x(3 * row + 1) = flat[static_cast<std::size_t>(3 * row + 1)] / sim::kMaxRate;
    x(3 * row + 2) = flat[static_cast<std::size_t>(3 * row + 2)] / (sim::kMaxRate / 4.0);
  }
  return x;
}

}  // namespace dtrbench::rl
