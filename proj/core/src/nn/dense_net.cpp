#include "dtrbench/nn/dense_net.hpp"

#include <atomic>
#include <cmath>

#include "dtrbench/errors.hpp"
#include "dtrbench/random.hpp"

namespace dtrbench::nn {

Gradients& Gradients::operator+=(const Gradients& other) {
  require(layers.size() == other.layers.size(), "gradient shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

Gradients& Gradients::operator*=(double s) {
  for (DenseLayer& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

double Gradients::squared_norm() const {
  double total = 0.0;
  for (const DenseLayer& l : layers) total += l.weight.squaredNorm() + l.bias.squaredNorm();
  return total;
}

std::uint64_t DenseNet::next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

DenseNet::DenseNet(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  require(sizes_.size() >= 2, "a network needs at least an input and an output layer");
  for (std::size_t s : sizes_) require(s > 0, "layer sizes must be positive");
  layers_.reserve(sizes_.size() - 1);
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(sizes_[i]);
    const auto out = static_cast<Eigen::Index>(sizes_[i + 1]);
    layers_.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

DenseNet::DenseNet(const DenseNet& other) : sizes_(other.sizes_), layers_(other.layers_) {}

DenseNet& DenseNet::operator=(const DenseNet& other) {
  if (this != &other) {
    sizes_ = other.sizes_;
    layers_ = other.layers_;
    id_ = next_id();
    version_ = 0;
  }
  return *this;
}

DenseNet DenseNet::init_near_zero(std::vector<std::size_t> layer_sizes, double scale,
                                  std::uint64_t seed) {
  require(scale >= 0.0 && std::isfinite(scale), "init scale must be non-negative");
  DenseNet net(std::move(layer_sizes));
  Rng rng(mix_seed(seed, 0x4E5A));
  for (DenseLayer& l : net.layers_) {
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = uniform(rng, -scale, scale);
  }
  return net;
}

DenseNet DenseNet::init_standard(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  DenseNet net(std::move(layer_sizes));
  Rng rng(mix_seed(seed, 0x57D));
  for (DenseLayer& l : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.weight.cols()));
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = uniform(rng, -bound, bound);
  }
  return net;
}

Eigen::VectorXd DenseNet::forward(const Eigen::VectorXd& input) const {
  require(static_cast<std::size_t>(input.size()) == input_size(), "forward: input size mismatch");
  require(input.allFinite(), "forward: non-finite input");
  Eigen::VectorXd a = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::VectorXd z = layers_[i].weight * a + layers_[i].bias;
    a = (i + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

ForwardCache DenseNet::forward_batch(const Eigen::MatrixXd& inputs) const {
  require(static_cast<std::size_t>(inputs.rows()) == input_size(), "forward: input size mismatch");
  require(inputs.allFinite(), "forward: non-finite input");
  ForwardCache cache;
  cache.net_id = id_;
  cache.net_version = version_;
  cache.activations.reserve(layers_.size() + 1);
  cache.preactivations.reserve(layers_.size());
  cache.activations.push_back(inputs);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * cache.activations.back();
    z.colwise() += layers_[i].bias;
    const bool hidden = i + 1 < layers_.size();
    cache.activations.push_back(hidden ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z);
    cache.preactivations.push_back(std::move(z));
  }
  return cache;
}

Gradients DenseNet::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const {
  require(cache.net_id == id_ && cache.net_version == version_,
          "backward: stale forward cache (network changed since forward)");
  require(cache.activations.size() == layers_.size() + 1, "backward: cache shape mismatch");
  require(output_grad.rows() == cache.output().rows() && output_grad.cols() == cache.output().cols(),
          "backward: output gradient shape mismatch");
  Gradients g;
  g.layers.resize(layers_.size());
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      delta = delta.cwiseProduct(
          (cache.preactivations[k].array() > 0.0).cast<double>().matrix());
    }
    g.layers[k].weight = delta * cache.activations[k].transpose();
    g.layers[k].bias = delta.rowwise().sum();
    if (k > 0) delta = layers_[k].weight.transpose() * delta;
  }
  return g;
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool DenseNet::all_finite() const {
  for (const DenseLayer& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

std::vector<DenseLayer>& DenseNet::mutable_layers() {
  ++version_;
  return layers_;
}

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  for (const DenseLayer& l : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

void DenseNet::copy_parameters_from(const DenseNet& other) {
  require(sizes_ == other.sizes_, "copy_parameters_from: shape mismatch");
  layers_ = other.layers_;
  ++version_;
}

bool operator==(const DenseNet& a, const DenseNet& b) {
  if (a.sizes_ != b.sizes_) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (a.layers_[i].weight != b.layers_[i].weight || a.layers_[i].bias != b.layers_[i].bias)
      return false;
  }
  return true;
}

}  // namespace dtrbench::nn
