#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dtrbench/nn/adam.hpp"
#include "dtrbench/nn/dense_net.hpp"
#include "dtrbench/random.hpp"
#include "dtrbench/rl/features.hpp"
#include "dtrbench/rl/squash.hpp"
#include "dtrbench/rl/training_env.hpp"
#include "dtrbench/rl/training_log.hpp"

namespace dtrbench::rl {

struct PpoConfig {
  int steps_per_collect = 192;
  int repeat_per_collect = 20;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.1;
  double value_coef = 0.5;
  double entropy_coef = 0.001;
  bool conditioned_sigma = false;
  bool value_clip = false;
  bool advantage_normalization = true;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  ActionTransform transform = ActionTransform::Tanh;
  double d_max = sim::kMaxRate;
  // Constant added to the mean logit. Unset: artanh(2 * 0.5 / d_max - 1) for Tanh, 0 for Clip.
  std::optional<double> mu_offset;
  double sigma_init = 0.5;
  double exploration_noise = 0.1;  // carried in the config and sidecar; not used by the update
  double init_scale = 1e-3;        // actor weights uniform in +/- init_scale, biases zero
  std::vector<std::size_t> hidden{64, 64};
  int epochs = 20;
  int steps_per_epoch = 480;
  std::size_t warm_start_steps = 192;

  void validate() const;
  double effective_mu_offset() const;
  std::vector<std::size_t> actor_sizes() const;
  std::vector<std::size_t> critic_sizes() const;
  std::uint64_t total_train_steps() const {
    return static_cast<std::uint64_t>(epochs) * static_cast<std::uint64_t>(steps_per_epoch);
  }
};

inline constexpr double kLogSigmaMin = -5.0;
inline constexpr double kLogSigmaMax = 2.0;

/// Gaussian policy over a scalar logit. With conditioned sigma the actor has a second output
/// that is added to log(sigma_init); otherwise a single free log-sigma is learned.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(const PpoConfig& config, std::uint64_t seed);
  GaussianPolicy(nn::DenseNet actor, double log_sigma, ActionTransform transform, double d_max,
                 double mu_offset, bool conditioned_sigma, double sigma_init);

  struct Head {
    double mu = 0;
    double sigma = 1;
  };
  Head head(const Eigen::VectorXd& features) const;

  struct Sample {
    double z = 0;
    double action = 0;
    double log_prob = 0;
  };
  Sample sample(const Eigen::VectorXd& features, Rng& rng) const;
  /// The action of the mean logit.
  double deterministic_action(const Eigen::VectorXd& features) const;
  double log_prob(const Eigen::VectorXd& features, double z) const;

  const nn::DenseNet& actor() const { return actor_; }
  nn::DenseNet& actor() { return actor_; }
  double log_sigma() const { return log_sigma_; }
  void set_log_sigma(double v);
  ActionTransform transform() const { return transform_; }
  double d_max() const { return d_max_; }
  double mu_offset() const { return mu_offset_; }
  bool conditioned_sigma() const { return conditioned_; }
  double sigma_init() const { return sigma_init_; }

 private:
  nn::DenseNet actor_;
  double log_sigma_ = 0;
  ActionTransform transform_ = ActionTransform::Tanh;
  double d_max_ = sim::kMaxRate;
  double mu_offset_ = 0;
  bool conditioned_ = false;
  double sigma_init_ = 0.5;
};

struct RolloutStep {
  FlatObservation obs{};
  FlatObservation next_obs{};
  double z = 0;
  double action = 0;
  double log_prob = 0;  // under the behaviour policy at collection time
  double reward = 0;
  double value = 0;
  double next_value = 0;  // V(next_obs), 0 after a termination
  bool terminated = false;
  bool truncated = false;
  bool episode_end = false;  // terminated, truncated, or last step of the buffer
};

struct RolloutBuffer {
  std::vector<RolloutStep> steps;
  /// Fills value / next_value from the critic and marks the final step as a chain break.
  void finalize(const nn::DenseNet& critic);
};

struct PpoLosses {
  double actor = 0;
  double value = 0;
  double entropy = 0;
  double total = 0;
  int minibatches = 0;
};

/// Actor, critic, free log-sigma and one Adam optimizer for each.
class PpoLearner {
 public:
  PpoLearner(const PpoConfig& config, std::uint64_t seed);

  /// repeat_per_collect passes of shuffled minibatch updates on a finalized rollout.
  /// Returns losses averaged over all minibatches. Throws TrainingFault on a non-finite loss.
  PpoLosses update(const RolloutBuffer& rollout, Rng& rng);

  const GaussianPolicy& policy() const { return policy_; }
  GaussianPolicy& policy() { return policy_; }
  const nn::DenseNet& critic() const { return critic_; }
  const PpoConfig& config() const { return config_; }

 private:
  PpoConfig config_;
  GaussianPolicy policy_;
  nn::DenseNet critic_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
  nn::VectorAdam sigma_opt_;
};

/// Behaviour density of a ~ U(0, 2) expressed in the measure the transform's log-prob uses.
double warm_start_log_prob(ActionTransform transform, double d_max = sim::kMaxRate);

/// Appends `steps` transitions with actions uniform on (0, 2] U/h. Returns the episodes that
/// finished along the way.
std::vector<EpisodeSummary> warm_start_ppo(RolloutBuffer& buffer, TrainingEnv& env,
                                           std::size_t steps, Rng& rng, ActionTransform transform,
                                           double d_max = sim::kMaxRate);

/// Appends `steps` on-policy transitions.
std::vector<EpisodeSummary> collect_rollout(RolloutBuffer& buffer, TrainingEnv& env,
                                            const GaussianPolicy& policy, std::size_t steps,
                                            Rng& rng);

struct PpoCheckpoint {
  int epoch = 0;
  GaussianPolicy policy;
  nn::DenseNet critic;
  double normalized_training_return = 0;
};

struct PpoRun {
  std::vector<PpoCheckpoint> checkpoints;
  TrainingLog log;
};

using PpoEpochCallback = std::function<void(const PpoCheckpoint&, const EpochLog&)>;

/// Collects steps_per_collect steps, updates, and takes a checkpoint after the update of every
/// collect that crosses a multiple of steps_per_epoch env steps.
PpoRun train_ppo(EnvGroup group, const PpoConfig& config, std::uint64_t seed,
                 const PpoEpochCallback& on_epoch = {});

ActionFn ppo_action_fn(const GaussianPolicy& policy);

}  // namespace dtrbench::rl
