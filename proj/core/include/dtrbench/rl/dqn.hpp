#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dtrbench/nn/adam.hpp"
#include "dtrbench/nn/dense_net.hpp"
#include "dtrbench/random.hpp"
#include "dtrbench/rl/features.hpp"
#include "dtrbench/rl/training_env.hpp"
#include "dtrbench/rl/training_log.hpp"

namespace dtrbench::rl {

struct DqnConfig {
  int n_actions = 11;
  double gamma = 0.99;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  int target_sync_every = 100;  // gradient steps
  double eps_train_start = 0.9;
  double eps_train_end = 0.1;
  double eps_test = 0.001;
  bool use_prior = false;
  std::size_t warm_start_steps = 480;
  std::size_t replay_capacity = 50'000;
  std::vector<std::size_t> hidden{64, 64};
  int epochs = 20;
  int steps_per_epoch = 480;
  int updates_per_step = 1;

  void validate() const;
  std::vector<std::size_t> layer_sizes() const;
  std::uint64_t total_train_steps() const {
    return static_cast<std::uint64_t>(epochs) * static_cast<std::uint64_t>(steps_per_epoch);
  }
};

/// Exploration distribution over dose bins: one probability for the zero-dose bin and a shared
/// one for every other bin.
struct ExplorationDistribution {
  int n_actions = 0;
  double p0 = 0;
  double p_other = 0;

  double probability(int bin) const;
  int sample(Rng& rng) const;
};

/// p0 = n(n+1) / (2n^2 - n + 1), p_other = (1 - p0) / (n - 1). For n = 11, p0 = 132/232.
ExplorationDistribution zero_biased_probs(int n_actions);
ExplorationDistribution uniform_probs(int n_actions);

/// Linear dose grid over [0, 9] U/h; with 11 bins each step is 0.9 U/h.
double bin_to_rate(int bin, int n_actions = 11);

/// Linear decay from eps_train_start to eps_train_end across all training steps.
double train_epsilon(const DqnConfig& config, std::uint64_t step);

struct Transition {
  FlatObservation obs{};
  int action = 0;
  double reward = 0;
  FlatObservation next_obs{};
  bool terminated = false;  // true only for extreme-glucose terminations; truncation bootstraps
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  /// `batch` distinct transitions chosen uniformly (Floyd's algorithm).
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

/// Greedy bin; ties go to the lowest (safest) bin.
int greedy_action(const nn::DenseNet& qnet, const Eigen::VectorXd& features);

/// With probability 1 - eps the greedy bin, otherwise a draw from `dist`.
int select_action(const nn::DenseNet& qnet, const Eigen::VectorXd& features, double eps,
                  const ExplorationDistribution& dist, Rng& rng);

struct WarmStartStats {
  int episodes_finished = 0;
  int hypo_terminations = 0;
};

/// Pushes `steps` transitions generated by a uniform policy over bins {0, 1, 2}.
WarmStartStats warm_start_fill(ReplayBuffer& buffer, TrainingEnv& env, std::size_t steps,
                               Rng& rng, int n_actions = 11);

/// One Adam step on the mean squared TD error with targets
/// y = r + gamma * max_a Q_target(s', a) * (1 - terminated). Returns the pre-update loss.
double train_step(nn::DenseNet& qnet, nn::Adam& optimizer, const nn::DenseNet& target_net,
                  std::span<const Transition* const> batch, const DqnConfig& config);

/// Online network, target network and optimizer; syncs the target every target_sync_every
/// gradient steps.
class DqnLearner {
 public:
  DqnLearner(const DqnConfig& config, std::uint64_t seed);

  double update(std::span<const Transition* const> batch);
  void sync_target();

  const nn::DenseNet& q_net() const { return q_; }
  const nn::DenseNet& target_net() const { return target_; }
  std::uint64_t gradient_steps() const { return gradient_steps_; }

 private:
  DqnConfig config_;
  nn::DenseNet q_;
  nn::DenseNet target_;
  nn::Adam optimizer_;
  std::uint64_t gradient_steps_ = 0;
};

struct DqnCheckpoint {
  int epoch = 0;
  nn::DenseNet q_net;
  double normalized_training_return = 0;
};

struct DqnRun {
  std::vector<DqnCheckpoint> checkpoints;
  TrainingLog log;
};

/// Called after each epoch with the checkpoint just taken (e.g. to persist it).
using DqnEpochCallback = std::function<void(const DqnCheckpoint&, const EpochLog&)>;

DqnRun train_dqn(EnvGroup group, const DqnConfig& config, std::uint64_t seed,
                 const DqnEpochCallback& on_epoch = {});

/// Greedy-with-eps_test action function for a trained Q-network.
ActionFn dqn_action_fn(const nn::DenseNet& qnet, const DqnConfig& config);

}  // namespace dtrbench::rl
