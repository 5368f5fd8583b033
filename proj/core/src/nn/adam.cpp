#include "dtrbench/nn/adam.hpp"

#include <cmath>

#include "dtrbench/errors.hpp"

namespace dtrbench::nn {
namespace {

template <class Param, class Grad>
void adam_update(Param& p, Param& m, Param& v, const Grad& g, const AdamConfig& c,
                 std::uint64_t t) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  p.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
}

}  // namespace

Adam::Adam(const DenseNet& net, AdamConfig config)
    : config_(config), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(DenseNet& net, const Gradients& grads) {
  require(grads.layers.size() == m_.layers.size(), "adam: gradient shape mismatch");
  ++steps_;
  auto& layers = net.mutable_layers();
  require(layers.size() == grads.layers.size(), "adam: network shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    require(layers[i].weight.rows() == grads.layers[i].weight.rows() &&
                layers[i].weight.cols() == grads.layers[i].weight.cols(),
            "adam: layer shape mismatch");
    adam_update(layers[i].weight, m_.layers[i].weight, v_.layers[i].weight,
                grads.layers[i].weight, config_, steps_);
    adam_update(layers[i].bias, m_.layers[i].bias, v_.layers[i].bias, grads.layers[i].bias,
                config_, steps_);
  }
}

VectorAdam::VectorAdam(Eigen::Index size, AdamConfig config)
    : config_(config), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void VectorAdam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
  require(params.size() == m_.size() && grads.size() == m_.size(), "adam: vector size mismatch");
  ++steps_;
  adam_update(params, m_, v_, grads, config_, steps_);
}

}  // namespace dtrbench::nn
