#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dtrbench/nn/dense_net.hpp"
#include "dtrbench/random.hpp"

namespace gradcheck {

using namespace dtrbench;

// Random small net, random batch, loss = sum(G .* net(X)). Returns the norm-wise relative error
// between backward() and central differences over every parameter.
inline double random_net_error(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> sizes;
  const int depth = 2 + static_cast<int>(uniform_index(rng, 3));  // 2..4 layers of sizes
  for (int i = 0; i < depth; ++i) sizes.push_back(1 + uniform_index(rng, 5));
  auto net = nn::DenseNet::init_standard(sizes, seed ^ 0x5eedULL);
  for (auto& l : net.mutable_layers()) {
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = uniform(rng, -0.5, 0.5);
  }
  const Eigen::Index batch = 1 + static_cast<Eigen::Index>(uniform_index(rng, 4));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(sizes.front()), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform(rng, -2, 2);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(sizes.back()), batch);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = uniform(rng, -1, 1);

  const auto cache = net.forward_batch(x);
  const auto analytic = net.backward(cache, g);

  auto loss = [&](const nn::DenseNet& n) { return (n.forward_batch(x).output().cwiseProduct(g)).sum(); };
  const double h = 1e-6;
  double diff2 = 0, a2 = 0, n2 = 0;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    auto probe = [&](auto pick, double a) {
      nn::DenseNet plus = net, minus = net;
      pick(plus.mutable_layers()[li]) += h;
      pick(minus.mutable_layers()[li]) -= h;
      const double num = (loss(plus) - loss(minus)) / (2 * h);
      diff2 += (a - num) * (a - num);
      a2 += a * a;
      n2 += num * num;
    };
    const auto& W = net.layers()[li].weight;
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c)
        probe([&](nn::DenseLayer& l) -> double& { return l.weight(r, c); },
              analytic.layers[li].weight(r, c));
      probe([&](nn::DenseLayer& l) -> double& { return l.bias(r); }, analytic.layers[li].bias(r));
    }
  }
  const double scale = std::sqrt(a2) + std::sqrt(n2);
  return scale < 1e-12 ? 0.0 : std::sqrt(diff2) / scale;
}

}  // namespace gradcheck
