#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dtrbench/nn/dense_net.hpp"

namespace dtrbench::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. The step counter is shared by every parameter tensor it updates.
class Adam {
 public:
  Adam() = default;
  Adam(const DenseNet& net, AdamConfig config);

  /// Descends along `grads` (gradients of the loss being minimized).
  void step(DenseNet& net, const Gradients& grads);

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return steps_; }
  const Gradients& first_moment() const { return m_; }
  const Gradients& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  Gradients m_;
  Gradients v_;
  std::uint64_t steps_ = 0;
};

/// Adam over a free parameter vector (e.g. a global log-std).
class VectorAdam {
 public:
  VectorAdam() = default;
  VectorAdam(Eigen::Index size, AdamConfig config);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads);
  std::uint64_t steps() const { return steps_; }

 private:
  AdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::uint64_t steps_ = 0;
};

}  // namespace dtrbench::nn
