#include "dtrbench/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <memory>
#include <numeric>

#include "dtrbench/errors.hpp"
#include "dtrbench/risk/risk.hpp"
#include "dtrbench/rl/gae.hpp"

namespace dtrbench::rl {

namespace {

// Entropy of N(mu, sigma^2) is log(sigma) + this.
const double kGaussEntropyConst = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

Eigen::MatrixXd feature_matrix(const std::vector<const FlatObservation*>& obs) {
  Eigen::MatrixXd m(sim::kObservationSize, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t j = 0; j < obs.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = observation_features(*obs[j]);
  return m;
}

void record_finished(const TrainingEnv::Outcome& out, std::vector<EpisodeSummary>& finished) {
  if (out.finished) finished.push_back(*out.finished);
}

}  // namespace

void PpoConfig::validate() const {
  require(steps_per_collect >= 1 && repeat_per_collect >= 1, "collect sizes must be positive");
  require(gamma >= 0 && gamma <= 1 && gae_lambda >= 0 && gae_lambda <= 1,
          "gamma and gae_lambda must be in [0, 1]");
  require(clip_eps > 0 && clip_eps < 1, "clip_eps must be in (0, 1)");
  require(value_coef >= 0 && entropy_coef >= 0 && exploration_noise >= 0,
          "coefficients must be non-negative");
  require(lr > 0, "learning rate must be positive");
  require(batch_size >= 1, "batch size must be positive");
  require(d_max > 0, "d_max must be positive");
  require(sigma_init > 0 && std::isfinite(sigma_init), "sigma_init must be positive");
  require(init_scale >= 0, "init_scale must be non-negative");
  require(epochs >= 1 && steps_per_epoch >= 1, "need at least one epoch of one step");
  if (mu_offset) require(std::isfinite(*mu_offset), "mu_offset must be finite");
}

double PpoConfig::effective_mu_offset() const {
  if (mu_offset) return *mu_offset;
  return transform == ActionTransform::Tanh ? tanh_offset_for_rate(0.5, d_max) : 0.0;
}

std::vector<std::size_t> PpoConfig::actor_sizes() const {
  std::vector<std::size_t> s{static_cast<std::size_t>(sim::kObservationSize)};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(conditioned_sigma ? 2 : 1);
  return s;
}

std::vector<std::size_t> PpoConfig::critic_sizes() const {
  std::vector<std::size_t> s{static_cast<std::size_t>(sim::kObservationSize)};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(1);
  return s;
}

GaussianPolicy::GaussianPolicy(const PpoConfig& config, std::uint64_t seed)
    : GaussianPolicy(nn::DenseNet::init_near_zero(config.actor_sizes(), config.init_scale,
                                                  mix_seed(seed, 0xAC7)),
                     std::log(config.sigma_init), config.transform, config.d_max,
                     config.effective_mu_offset(), config.conditioned_sigma, config.sigma_init) {}

GaussianPolicy::GaussianPolicy(nn::DenseNet actor, double log_sigma, ActionTransform transform,
                               double d_max, double mu_offset, bool conditioned_sigma,
                               double sigma_init)
    : actor_(std::move(actor)),
      transform_(transform),
      d_max_(d_max),
      mu_offset_(mu_offset),
      conditioned_(conditioned_sigma),
      sigma_init_(sigma_init) {
  require(actor_.output_size() == (conditioned_ ? 2u : 1u), "actor output size does not match sigma mode");
  require(actor_.input_size() == static_cast<std::size_t>(sim::kObservationSize), "actor input must be 48");
  set_log_sigma(log_sigma);
}

void GaussianPolicy::set_log_sigma(double v) {
  require(std::isfinite(v), "log sigma must be finite");
  log_sigma_ = std::clamp(v, kLogSigmaMin, kLogSigmaMax);
}

GaussianPolicy::Head GaussianPolicy::head(const Eigen::VectorXd& features) const {
  const Eigen::VectorXd out = actor_.forward(features);
  const double ls = conditioned_
                        ? std::clamp(out(1) + std::log(sigma_init_), kLogSigmaMin, kLogSigmaMax)
                        : log_sigma_;
  return {out(0) + mu_offset_, std::exp(ls)};
}

GaussianPolicy::Sample GaussianPolicy::sample(const Eigen::VectorXd& features, Rng& rng) const {
  const Head h = head(features);
  Sample s;
  s.z = h.mu + h.sigma * standard_normal(rng);
  s.action = apply_transform(transform_, s.z, d_max_);
  s.log_prob = transform_log_prob(transform_, s.z, h.mu, h.sigma, d_max_);
  return s;
}

double GaussianPolicy::deterministic_action(const Eigen::VectorXd& features) const {
  return apply_transform(transform_, head(features).mu, d_max_);
}

double GaussianPolicy::log_prob(const Eigen::VectorXd& features, double z) const {
  const Head h = head(features);
  return transform_log_prob(transform_, z, h.mu, h.sigma, d_max_);
}

void RolloutBuffer::finalize(const nn::DenseNet& critic) {
  if (steps.empty()) return;
  std::vector<const FlatObservation*> obs, next;
  for (const auto& s : steps) {
    obs.push_back(&s.obs);
    next.push_back(&s.next_obs);
  }
  const Eigen::MatrixXd v = critic.forward_batch(feature_matrix(obs)).output();
  const Eigen::MatrixXd vn = critic.forward_batch(feature_matrix(next)).output();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto& s = steps[i];
    s.value = v(0, static_cast<Eigen::Index>(i));
    s.next_value = s.terminated ? 0.0 : vn(0, static_cast<Eigen::Index>(i));
    s.episode_end = s.terminated || s.truncated || i + 1 == steps.size();
  }
}

PpoLearner::PpoLearner(const PpoConfig& config, std::uint64_t seed)
    : config_(config),
      policy_(config, seed),
      critic_(nn::DenseNet::init_standard(config.critic_sizes(), mix_seed(seed, 0xC417))),
      actor_opt_(policy_.actor(), nn::AdamConfig{config.lr}),
      critic_opt_(critic_, nn::AdamConfig{config.lr}),
      sigma_opt_(1, nn::AdamConfig{config.lr}) {
  config_.validate();
}

PpoLosses PpoLearner::update(const RolloutBuffer& rollout, Rng& rng) {
  const auto& steps = rollout.steps;
  const std::size_t n = steps.size();
  require(n > 0, "ppo update needs a non-empty rollout");

  std::vector<double> rewards(n), values(n), next_values(n);
  // std::vector<bool> is not contiguous, so the flags go in a plain array.
  auto end_flags = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = steps[i].reward;
    values[i] = steps[i].value;
    next_values[i] = steps[i].next_value;
    end_flags[i] = steps[i].episode_end;
  }
  GaeResult g = gae(rewards, values, next_values, std::span<const bool>(end_flags.get(), n),
                    config_.gamma, config_.gae_lambda);
  if (config_.advantage_normalization) normalize_advantages(g.advantages);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const ActionTransform tf = policy_.transform();
  const double d = policy_.d_max();
  const bool cond = policy_.conditioned_sigma();
  const double eps = config_.clip_eps;

  PpoLosses acc;
  for (int rep = 0; rep < config_.repeat_per_collect; ++rep) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config_.batch_size) {
      const std::size_t stop = std::min(n, start + config_.batch_size);
      const auto b = static_cast<Eigen::Index>(stop - start);
      const double inv_b = 1.0 / static_cast<double>(b);
      std::vector<const FlatObservation*> obs;
      for (std::size_t k = start; k < stop; ++k) obs.push_back(&steps[order[k]].obs);
      const Eigen::MatrixXd x = feature_matrix(obs);

      const nn::ForwardCache a_cache = policy_.actor().forward_batch(x);
      const nn::ForwardCache c_cache = critic_.forward_batch(x);
      const Eigen::MatrixXd& out = a_cache.output();
      const Eigen::MatrixXd& vout = c_cache.output();

      Eigen::MatrixXd a_grad = Eigen::MatrixXd::Zero(out.rows(), b);
      Eigen::MatrixXd c_grad = Eigen::MatrixXd::Zero(1, b);
      double sigma_grad = 0.0;
      double actor_loss = 0.0, value_loss = 0.0, entropy = 0.0;

      for (Eigen::Index j = 0; j < b; ++j) {
        const std::size_t idx = order[start + static_cast<std::size_t>(j)];
        const RolloutStep& s = steps[idx];
        const double adv = g.advantages[idx];
        const double ret = g.returns[idx];

        const double mu = out(0, j) + policy_.mu_offset();
        double log_sigma = policy_.log_sigma();
        bool sigma_clamped = false;
        if (cond) {
          const double raw = out(1, j) + std::log(policy_.sigma_init());
          log_sigma = std::clamp(raw, kLogSigmaMin, kLogSigmaMax);
          sigma_clamped = raw != log_sigma;
        }
        const double sigma = std::exp(log_sigma);
        const double logp = transform_log_prob(tf, s.z, mu, sigma, d);
        const double ratio = std::exp(logp - s.log_prob);
        const double surr1 = ratio * adv;
        const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
        actor_loss -= std::min(surr1, surr2) * inv_b;
        // The clipped branch is constant in the parameters.
        const double dlogp = surr1 <= surr2 ? -adv * ratio * inv_b : 0.0;
        const double u = (s.z - mu) / sigma;
        a_grad(0, j) = dlogp * u / sigma;
        const double d_log_sigma = dlogp * (u * u - 1.0) - config_.entropy_coef * inv_b;
        entropy += (log_sigma + kGaussEntropyConst) * inv_b;
        if (cond) {
          if (!sigma_clamped) a_grad(1, j) = d_log_sigma;
        } else {
          sigma_grad += d_log_sigma;
        }

        const double v = vout(0, j);
        const double e1 = v - ret;
        double vl = e1 * e1;
        double dv = 2.0 * e1;
        if (config_.value_clip) {
          const double delta = v - s.value;
          const double vc = s.value + std::clamp(delta, -eps, eps);
          const double e2 = vc - ret;
          if (e2 * e2 > vl) {
            vl = e2 * e2;
            dv = std::abs(delta) < eps ? 2.0 * e2 : 0.0;
          }
        }
        value_loss += vl * inv_b;
        c_grad(0, j) = config_.value_coef * dv * inv_b;
      }

      const double total = actor_loss + config_.value_coef * value_loss - config_.entropy_coef * entropy;
      if (!std::isfinite(total)) {
        throw TrainingFault("PPO loss is not finite (actor " + std::to_string(actor_loss) +
                            ", value " + std::to_string(value_loss) + ")");
      }
      acc.actor += actor_loss;
      acc.value += value_loss;
      acc.entropy += entropy;
      acc.total += total;
      ++acc.minibatches;

      actor_opt_.step(policy_.actor(), policy_.actor().backward(a_cache, a_grad));
      critic_opt_.step(critic_, critic_.backward(c_cache, c_grad));
      if (!cond) {
        Eigen::VectorXd p(1), gr(1);
        p(0) = policy_.log_sigma();
        gr(0) = sigma_grad;
        sigma_opt_.step(p, gr);
        policy_.set_log_sigma(p(0));
      }
    }
  }
  if (acc.minibatches > 0) {
    const double k = acc.minibatches;
    acc.actor /= k;
    acc.value /= k;
    acc.entropy /= k;
    acc.total /= k;
  }
  return acc;
}

double warm_start_log_prob(ActionTransform transform, double d_max) {
  // a ~ U(0, 2): density 1/2 in action space; for Clip the log-prob lives on z = 2a/d - 1,
  // whose density is (d/2) / 2.
  return transform == ActionTransform::Tanh ? -std::log(2.0) : std::log(d_max / 4.0);
}

std::vector<EpisodeSummary> warm_start_ppo(RolloutBuffer& buffer, TrainingEnv& env,
                                           std::size_t steps, Rng& rng, ActionTransform transform,
                                           double d_max) {
  require(d_max > 2.0, "warm-start interval must fit inside the action range");
  std::vector<EpisodeSummary> finished;
  const double behaviour = warm_start_log_prob(transform, d_max);
  for (std::size_t i = 0; i < steps; ++i) {
    RolloutStep s;
    s.obs = env.observation().flat;
    s.action = 2.0 * (1.0 - uniform(rng, 0.0, 1.0));  // (0, 2]
    s.z = transform == ActionTransform::Tanh ? unsquash_tanh(s.action, d_max)
                                             : 2.0 * s.action / d_max - 1.0;
    s.log_prob = behaviour;
    const auto out = env.step(s.action);
    s.reward = out.result.reward;
    s.next_obs = out.result.observation.flat;
    s.terminated = out.result.terminated;
    s.truncated = out.result.truncated;
    buffer.steps.push_back(s);
    record_finished(out, finished);
  }
  return finished;
}

std::vector<EpisodeSummary> collect_rollout(RolloutBuffer& buffer, TrainingEnv& env,
                                            const GaussianPolicy& policy, std::size_t steps,
                                            Rng& rng) {
  std::vector<EpisodeSummary> finished;
  for (std::size_t i = 0; i < steps; ++i) {
    RolloutStep s;
    s.obs = env.observation().flat;
    const auto smp = policy.sample(observation_features(s.obs), rng);
    s.z = smp.z;
    s.action = smp.action;
    s.log_prob = smp.log_prob;
    const auto out = env.step(s.action);
    s.reward = out.result.reward;
    s.next_obs = out.result.observation.flat;
    s.terminated = out.result.terminated;
    s.truncated = out.result.truncated;
    buffer.steps.push_back(s);
    record_finished(out, finished);
  }
  return finished;
}

ActionFn ppo_action_fn(const GaussianPolicy& policy) {
  return [policy](const sim::Observation& obs, Rng&) {
    return policy.deterministic_action(observation_features(obs));
  };
}

PpoRun train_ppo(EnvGroup group, const PpoConfig& config, std::uint64_t seed,
                 const PpoEpochCallback& on_epoch) {
  config.validate();
  PpoRun run;
  run.log.algo = "ppo";
  run.log.env_group = std::string(to_string(group));
  run.log.prior = config.transform == ActionTransform::Tanh;
  run.log.seed = seed;

  Rng rng(mix_seed(seed, 0xA11CE));
  TrainingEnv env(group, mix_seed(seed, 0xE4));
  PpoLearner learner(config, seed);

  if (config.warm_start_steps > 0) {
    RolloutBuffer warm;
    const auto finished =
        warm_start_ppo(warm, env, config.warm_start_steps, rng, config.transform, config.d_max);
    for (const auto& e : finished) run.log.warm_start_hypo_terminations += e.hypoglycemia;
    warm.finalize(learner.critic());
    learner.update(warm, rng);
  }

  std::uint64_t total = 0;
  int epoch = 1;
  EpochLog cur;
  double return_sum = 0.0, loss_sum = 0.0;
  int loss_count = 0;
  while (epoch <= config.epochs) {
    RolloutBuffer buf;
    const auto finished = collect_rollout(buf, env, learner.policy(),
                                          static_cast<std::size_t>(config.steps_per_collect), rng);
    for (const auto& e : finished) {
      ++cur.episodes_finished;
      return_sum += risk::normalized_return(e.total_return);
      cur.hypo_terminations += e.hypoglycemia;
      cur.hyper_terminations += e.hyperglycemia;
    }
    buf.finalize(learner.critic());
    loss_sum += learner.update(buf, rng).total;
    ++loss_count;
    total += static_cast<std::uint64_t>(config.steps_per_collect);

    while (epoch <= config.epochs &&
           total >= static_cast<std::uint64_t>(epoch) * static_cast<std::uint64_t>(config.steps_per_epoch)) {
      cur.epoch = epoch;
      cur.env_steps = total;
      cur.mean_loss = loss_count ? loss_sum / loss_count : 0.0;
      cur.mean_exploration_return = cur.episodes_finished ? return_sum / cur.episodes_finished : 0.0;
      PpoCheckpoint ckpt{epoch, learner.policy(), learner.critic(), 0.0};
      ckpt.normalized_training_return =
          evaluate_in_group(ppo_action_fn(ckpt.policy), group, mix_seed(seed, 0xC4EC));
      cur.normalized_training_return = ckpt.normalized_training_return;
      run.log.epochs.push_back(cur);
      if (on_epoch) on_epoch(ckpt, cur);
      run.checkpoints.push_back(std::move(ckpt));
      ++epoch;
      cur = EpochLog{};
      return_sum = loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return run;
}

}  // namespace dtrbench::rl
