#include "dtrbench/rl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dtrbench/errors.hpp"
#include "dtrbench/risk/risk.hpp"

namespace dtrbench::rl {

void DqnConfig::validate() const {
  require(n_actions >= 2, "DQN needs at least two actions");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  require(lr > 0.0, "learning rate must be positive");
  require(batch_size >= 1, "batch size must be positive");
  require(target_sync_every >= 1, "target_sync_every must be positive");
  require(eps_train_start >= 0 && eps_train_start <= 1 && eps_train_end >= 0 &&
              eps_train_end <= 1 && eps_test >= 0 && eps_test <= 1,
          "epsilon values must be in [0, 1]");
  require(replay_capacity >= batch_size, "replay capacity smaller than a batch");
  require(epochs >= 1 && steps_per_epoch >= 1, "need at least one epoch of one step");
  require(updates_per_step >= 0, "updates_per_step must be non-negative");
}

std::vector<std::size_t> DqnConfig::layer_sizes() const {
  std::vector<std::size_t> sizes{static_cast<std::size_t>(sim::kObservationSize)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(static_cast<std::size_t>(n_actions));
  return sizes;
}

double ExplorationDistribution::probability(int bin) const {
  require(bin >= 0 && bin < n_actions, "bin out of range");
  return bin == 0 ? p0 : p_other;
}

int ExplorationDistribution::sample(Rng& rng) const {
  const double u = uniform(rng, 0.0, 1.0);
  if (u < p0) return 0;
  const auto k = static_cast<int>((u - p0) / p_other);
  return std::clamp(1 + k, 1, n_actions - 1);
}

ExplorationDistribution zero_biased_probs(int n) {
  require(n >= 2, "zero_biased_probs needs at least two actions");
  const double nd = n;
  const double p0 = nd * (nd + 1.0) / (2.0 * nd * nd - nd + 1.0);
  return {n, p0, (1.0 - p0) / (nd - 1.0)};
}

ExplorationDistribution uniform_probs(int n) {
  require(n >= 2, "uniform_probs needs at least two actions");
  return {n, 1.0 / n, 1.0 / n};
}

double bin_to_rate(int bin, int n_actions) {
  require(n_actions >= 2 && bin >= 0 && bin < n_actions, "dose bin out of range");
  return sim::kMaxRate * bin / (n_actions - 1);
}

double train_epsilon(const DqnConfig& c, std::uint64_t step) {
  const std::uint64_t total = c.total_train_steps();
  const double frac =
      total <= 1 ? 1.0 : std::min(1.0, static_cast<double>(step) / static_cast<double>(total - 1));
  return c.eps_train_start + (c.eps_train_end - c.eps_train_start) * frac;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  require(batch >= 1 && batch <= data_.size(), "cannot sample more transitions than stored");
  // Floyd: for j in [n - k, n) pick t in [0, j]; keep t unless already chosen, else take j.
  const std::size_t n = data_.size();
  std::unordered_set<std::size_t> chosen;
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t j = n - batch; j < n; ++j) {
    std::size_t t = uniform_index(rng, j + 1);
    if (!chosen.insert(t).second) {
      chosen.insert(j);
      t = j;
    }
    out.push_back(&data_[t]);
  }
  return out;
}

int greedy_action(const nn::DenseNet& qnet, const Eigen::VectorXd& features) {
  const Eigen::VectorXd q = qnet.forward(features);
  int best = 0;
  for (int a = 1; a < q.size(); ++a) {
    if (q(a) > q(best)) best = a;
  }
  return best;
}

int select_action(const nn::DenseNet& qnet, const Eigen::VectorXd& features, double eps,
                  const ExplorationDistribution& dist, Rng& rng) {
  require(eps >= 0.0 && eps <= 1.0, "epsilon must be in [0, 1]");
  if (eps > 0.0 && uniform(rng, 0.0, 1.0) < eps) return dist.sample(rng);
  return greedy_action(qnet, features);
}

WarmStartStats warm_start_fill(ReplayBuffer& buffer, TrainingEnv& env, std::size_t steps,
                               Rng& rng, int n_actions) {
  WarmStartStats stats;
  for (std::size_t i = 0; i < steps; ++i) {
    Transition t;
    t.obs = env.observation().flat;
    t.action = static_cast<int>(uniform_index(rng, 3));
    const auto out = env.step(bin_to_rate(t.action, n_actions));
    t.reward = out.result.reward;
    t.next_obs = out.result.observation.flat;
    t.terminated = out.result.terminated;
    buffer.push(t);
    if (out.finished) {
      ++stats.episodes_finished;
      if (out.finished->hypoglycemia) ++stats.hypo_terminations;
    }
  }
  return stats;
}

double train_step(nn::DenseNet& qnet, nn::Adam& optimizer, const nn::DenseNet& target_net,
                  std::span<const Transition* const> batch, const DqnConfig& config) {
  require(!batch.empty(), "train_step needs a non-empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto in = static_cast<Eigen::Index>(sim::kObservationSize);
  Eigen::MatrixXd obs(in, b);
  Eigen::MatrixXd next(in, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    obs.col(j) = observation_features(batch[static_cast<std::size_t>(j)]->obs);
    next.col(j) = observation_features(batch[static_cast<std::size_t>(j)]->next_obs);
  }

  const Eigen::MatrixXd q_next = target_net.forward_batch(next).output();
  const nn::ForwardCache cache = qnet.forward_batch(obs);
  const Eigen::MatrixXd& q = cache.output();

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[static_cast<std::size_t>(j)];
    require(t.action >= 0 && t.action < q.rows(), "transition action out of range");
    const double bootstrap = t.terminated ? 0.0 : config.gamma * q_next.col(j).maxCoeff();
    const double td = q(t.action, j) - (t.reward + bootstrap);
    loss += td * td;
    grad(t.action, j) = 2.0 * td / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);
  if (!std::isfinite(loss)) throw TrainingFault("DQN TD loss is not finite");

  optimizer.step(qnet, qnet.backward(cache, grad));
  return loss;
}

DqnLearner::DqnLearner(const DqnConfig& config, std::uint64_t seed)
    : config_(config),
      q_(nn::DenseNet::init_standard(config.layer_sizes(), mix_seed(seed, 0xD0))),
      target_(q_),
      optimizer_(q_, nn::AdamConfig{config.lr}) {
  config_.validate();
}

double DqnLearner::update(std::span<const Transition* const> batch) {
  const double loss = train_step(q_, optimizer_, target_, batch, config_);
  ++gradient_steps_;
  if (gradient_steps_ % static_cast<std::uint64_t>(config_.target_sync_every) == 0) sync_target();
  return loss;
}

void DqnLearner::sync_target() { target_.copy_parameters_from(q_); }

ActionFn dqn_action_fn(const nn::DenseNet& qnet, const DqnConfig& config) {
  const ExplorationDistribution dist =
      config.use_prior ? zero_biased_probs(config.n_actions) : uniform_probs(config.n_actions);
  return [qnet, dist, eps = config.eps_test, n = config.n_actions](const sim::Observation& obs,
                                                                   Rng& rng) {
    return bin_to_rate(select_action(qnet, observation_features(obs), eps, dist, rng), n);
  };
}

DqnRun train_dqn(EnvGroup group, const DqnConfig& config, std::uint64_t seed,
                 const DqnEpochCallback& on_epoch) {
  config.validate();
  DqnRun run;
  run.log.algo = "dqn";
  run.log.env_group = std::string(to_string(group));
  run.log.prior = config.use_prior;
  run.log.seed = seed;

  Rng rng(mix_seed(seed, 0xA11CE));
  TrainingEnv env(group, mix_seed(seed, 0xE4));
  ReplayBuffer buffer(config.replay_capacity);
  DqnLearner learner(config, seed);
  const ExplorationDistribution dist =
      config.use_prior ? zero_biased_probs(config.n_actions) : uniform_probs(config.n_actions);

  run.log.warm_start_hypo_terminations =
      warm_start_fill(buffer, env, config.warm_start_steps, rng, config.n_actions).hypo_terminations;

  std::uint64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    double loss_sum = 0.0;
    int loss_count = 0;
    double return_sum = 0.0;
    for (int i = 0; i < config.steps_per_epoch; ++i, ++step) {
      const double eps = train_epsilon(config, step);
      log.epsilon = eps;
      Transition t;
      t.obs = env.observation().flat;
      t.action = select_action(learner.q_net(), observation_features(t.obs), eps, dist, rng);
      const auto out = env.step(bin_to_rate(t.action, config.n_actions));
      t.reward = out.result.reward;
      t.next_obs = out.result.observation.flat;
      t.terminated = out.result.terminated;
      buffer.push(t);
      if (out.finished) {
        ++log.episodes_finished;
        return_sum += risk::normalized_return(out.finished->total_return);
        if (out.finished->hypoglycemia) ++log.hypo_terminations;
        if (out.finished->hyperglycemia) ++log.hyper_terminations;
      }
      if (buffer.size() >= config.batch_size) {
        for (int u = 0; u < config.updates_per_step; ++u) {
          const auto batch = buffer.sample(config.batch_size, rng);
          loss_sum += learner.update(batch);
          ++loss_count;
        }
      }
    }
    log.env_steps = step;
    log.mean_loss = loss_count ? loss_sum / loss_count : 0.0;
    log.mean_exploration_return = log.episodes_finished ? return_sum / log.episodes_finished : 0.0;

    DqnCheckpoint ckpt{epoch, learner.q_net(), 0.0};
    ckpt.normalized_training_return =
        evaluate_in_group(dqn_action_fn(ckpt.q_net, config), group, mix_seed(seed, 0xC4EC));
    log.normalized_training_return = ckpt.normalized_training_return;
    run.log.epochs.push_back(log);
    if (on_epoch) on_epoch(ckpt, log);
    run.checkpoints.push_back(std::move(ckpt));
  }
  return run;
}

}  // namespace dtrbench::rl
