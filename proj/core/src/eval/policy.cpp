#include "dtrbench/eval/policy.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "dtrbench/errors.hpp"
#include "dtrbench/random.hpp"

namespace dtrbench::eval {

namespace {

class ScriptedActor final : public EpisodeActor {
 public:
  ScriptedActor(ScriptedPolicySpec spec, std::uint64_t seed) : spec_(spec), rng_(mix_seed(seed, 0x5C21)) {}
  double act(const sim::GlucoseEnv&, const sim::Observation&) override {
    switch (spec_.kind) {
      case ScriptedKind::Zero: return 0.0;
      case ScriptedKind::Max: return sim::kMaxRate;
      case ScriptedKind::Constant: return spec_.rate;
      case ScriptedKind::Random012: return rl::bin_to_rate(static_cast<int>(uniform_index(rng_, 3)));
    }
    return 0.0;
  }

 private:
  ScriptedPolicySpec spec_;
  Rng rng_;
};

class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(ScriptedPolicySpec spec) : spec_(spec) {
    if (spec_.kind == ScriptedKind::Constant)
      require(spec_.rate >= 0.0 && spec_.rate <= sim::kMaxRate, "constant rate must be in [0, 9]");
  }
  std::unique_ptr<EpisodeActor> start_episode(const std::string&, std::uint64_t seed) const override {
    return std::make_unique<ScriptedActor>(spec_, seed);
  }
  std::string identity() const override {
    if (spec_.kind == ScriptedKind::Constant) return fmt::format("scripted:constant:{}", spec_.rate);
    return fmt::format("scripted:{}", to_string(spec_.kind));
  }

 private:
  ScriptedPolicySpec spec_;
};

class FnActor final : public EpisodeActor {
 public:
  FnActor(const rl::ActionFn& fn, std::uint64_t seed) : fn_(fn), rng_(mix_seed(seed, 0xAC70)) {}
  double act(const sim::GlucoseEnv&, const sim::Observation& obs) override { return fn_(obs, rng_); }

 private:
  const rl::ActionFn& fn_;
  Rng rng_;
};

class FnPolicy final : public Policy {
 public:
  FnPolicy(rl::ActionFn fn, std::string id) : fn_(std::move(fn)), id_(std::move(id)) {}
  std::unique_ptr<EpisodeActor> start_episode(const std::string&, std::uint64_t seed) const override {
    return std::make_unique<FnActor>(fn_, seed);
  }
  std::string identity() const override { return id_; }

 private:
  rl::ActionFn fn_;
  std::string id_;
};

class LlmActor final : public EpisodeActor {
 public:
  LlmActor(const llm::LlmClient& client, llm::PromptKind kind, llm::AuditLog* audit, std::string episode)
      : client_(client), kind_(kind), audit_(audit), episode_(std::move(episode)) {}

  double act(const sim::GlucoseEnv& env, const sim::Observation&) override {
    const llm::LlmAction a = client_.act(env.history(), kind_);
    if (a.status == llm::ActStatus::FallbackUsed) ++fallbacks_;
    if (audit_) audit_->append({episode_, env.step_count(), kind_, client_.config().fallback_dose}, a);
    return a.action;
  }
  int fallback_actions() const override { return fallbacks_; }

 private:
  const llm::LlmClient& client_;
  llm::PromptKind kind_;
  llm::AuditLog* audit_;
  std::string episode_;
  int fallbacks_ = 0;
};

class LlmPolicy final : public Policy {
 public:
  explicit LlmPolicy(const LlmPolicySpec& spec)
      : kind_(spec.kind), client_(std::make_unique<llm::LlmClient>(spec.config)) {
    if (!spec.audit_log.empty()) audit_ = std::make_unique<llm::AuditLog>(spec.audit_log.string());
  }
  std::unique_ptr<EpisodeActor> start_episode(const std::string& id, std::uint64_t) const override {
    return std::make_unique<LlmActor>(*client_, kind_, audit_.get(), id);
  }
  std::string identity() const override {
    return fmt::format("llm:{}:{}:t={}", client_->config().model_name, llm::to_string(kind_),
                       client_->config().temperature);
  }

 private:
  llm::PromptKind kind_;
  std::unique_ptr<llm::LlmClient> client_;
  std::unique_ptr<llm::AuditLog> audit_;
};

}  // namespace

std::string_view to_string(ScriptedKind k) {
  switch (k) {
    case ScriptedKind::Zero: return "zero";
    case ScriptedKind::Max: return "max";
    case ScriptedKind::Constant: return "constant";
    case ScriptedKind::Random012: return "random012";
  }
  return "zero";
}

ScriptedKind parse_scripted_kind(std::string_view name) {
  for (ScriptedKind k : {ScriptedKind::Zero, ScriptedKind::Max, ScriptedKind::Constant, ScriptedKind::Random012})
    if (to_string(k) == name) return k;
  throw FormatError("unknown scripted policy '" + std::string(name) + "'");
}

std::shared_ptr<const Policy> make_dqn_policy(nn::DenseNet q_net, rl::DqnConfig config, std::string identity) {
  return std::make_shared<FnPolicy>(rl::dqn_action_fn(q_net, config), std::move(identity));
}

std::shared_ptr<const Policy> make_ppo_policy(rl::GaussianPolicy policy, std::string identity) {
  return std::make_shared<FnPolicy>(rl::ppo_action_fn(policy), std::move(identity));
}

std::shared_ptr<const Policy> resolve_policy(const PolicySpec& spec) {
  if (const auto* s = std::get_if<ScriptedPolicySpec>(&spec)) return std::make_shared<ScriptedPolicy>(*s);
  if (const auto* l = std::get_if<LlmPolicySpec>(&spec)) return std::make_shared<LlmPolicy>(*l);
  const auto& c = std::get<CheckpointPolicySpec>(spec);
  const rl::LoadedPolicy loaded = rl::load_policy_checkpoint(c.sidecar);
  if (const auto* d = std::get_if<rl::LoadedDqn>(&loaded)) {
    return make_dqn_policy(d->q_net, d->config,
                           fmt::format("dqn:{}:prior={}:seed={}:epoch={}", d->meta.env_group,
                                       d->config.use_prior ? "on" : "off", d->meta.seed, d->meta.epoch));
  }
  const auto& p = std::get<rl::LoadedPpo>(loaded);
  return make_ppo_policy(p.policy, fmt::format("ppo:{}:{}:seed={}:epoch={}", p.meta.env_group,
                                               rl::to_string(p.config.transform), p.meta.seed, p.meta.epoch));
}

}  // namespace dtrbench::eval
