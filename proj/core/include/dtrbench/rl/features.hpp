#pragma once

#include <Eigen/Dense>

#include <array>

#include "dtrbench/sim/types.hpp"

namespace dtrbench::rl {

using FlatObservation = std::array<double, sim::kObservationSize>;

/// Fixed affine scaling of the stacked observation before it reaches a network:
/// glucose (g - 140) / 100, rate / 9, dose / 2.25.
Eigen::VectorXd observation_features(const FlatObservation& flat);
inline Eigen::VectorXd observation_features(const sim::Observation& obs) {
  return observation_features(obs.flat);
}

}  // namespace dtrbench::rl
