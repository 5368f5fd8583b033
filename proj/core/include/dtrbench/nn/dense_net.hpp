#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dtrbench::nn {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Parameter-shaped gradient container.
struct Gradients {
  std::vector<DenseLayer> layers;

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double s);
  double squared_norm() const;
};

/// Activations of one batched forward pass. Columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // [0] = input, back() = output
  std::vector<Eigen::MatrixXd> preactivations;
  std::uint64_t net_id = 0;
  std::uint64_t net_version = 0;

  const Eigen::MatrixXd& output() const { return activations.back(); }
};

/// Fully connected network: ReLU on every hidden layer, linear output.
class DenseNet {
 public:
  DenseNet() = default;
  /// All-zero parameters.
  explicit DenseNet(std::vector<std::size_t> layer_sizes);

  // Copies get a fresh identity so caches from one copy are rejected by the other.
  DenseNet(const DenseNet& other);
  DenseNet& operator=(const DenseNet& other);
  DenseNet(DenseNet&&) noexcept = default;
  DenseNet& operator=(DenseNet&&) noexcept = default;

  /// Biases zero, weights uniform in [-scale, scale].
  static DenseNet init_near_zero(std::vector<std::size_t> layer_sizes, double scale,
                                 std::uint64_t seed);
  /// Biases zero, weights uniform in +/- 1/sqrt(fan_in).
  static DenseNet init_standard(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  ForwardCache forward_batch(const Eigen::MatrixXd& inputs) const;

  /// Parameter gradients of sum_j <output_grad(:, j), output(:, j)>. The cache must come from
  /// this network without intervening parameter updates.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Mutable access invalidates outstanding forward caches.
  std::vector<DenseLayer>& mutable_layers();

  Gradients zero_gradients() const;

  /// Copy parameters from a network of identical shape (target-network sync).
  void copy_parameters_from(const DenseNet& other);

  friend bool operator==(const DenseNet& a, const DenseNet& b);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
  std::uint64_t id_ = next_id();
  std::uint64_t version_ = 0;

  static std::uint64_t next_id();
};

}  // namespace dtrbench::nn
