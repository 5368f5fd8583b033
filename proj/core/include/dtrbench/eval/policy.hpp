#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include "dtrbench/llm/client.hpp"
#include "dtrbench/llm/prompts.hpp"
#include "dtrbench/rl/policy_checkpoint.hpp"
#include "dtrbench/sim/environment.hpp"

namespace dtrbench::eval {

enum class ScriptedKind { Zero, Max, Constant, Random012 };

struct ScriptedPolicySpec {
  ScriptedKind kind = ScriptedKind::Zero;
  double rate = 0;  // Constant only
};

struct CheckpointPolicySpec {
  std::filesystem::path sidecar;
};

struct LlmPolicySpec {
  llm::PromptKind kind = llm::PromptKind::BaseZeroShot;
  llm::LlmConfig config;
  std::filesystem::path audit_log;  // empty: no audit
};

using PolicySpec = std::variant<ScriptedPolicySpec, CheckpointPolicySpec, LlmPolicySpec>;

/// Per-episode decision maker. Owned by one worker for one episode.
class EpisodeActor {
 public:
  virtual ~EpisodeActor() = default;
  /// Rate in [0, 9] for the next interval, given the environment after its latest step.
  virtual double act(const sim::GlucoseEnv& env, const sim::Observation& obs) = 0;
  /// Steps whose action came from the LLM fallback path.
  virtual int fallback_actions() const { return 0; }
};

/// A resolved policy: loaded weights or a configured client, shared read-only by workers.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::unique_ptr<EpisodeActor> start_episode(const std::string& episode_id,
                                                      std::uint64_t episode_seed) const = 0;
  virtual std::string identity() const = 0;
};

/// Loads checkpoints / builds clients up front so failures surface before any stepping.
std::shared_ptr<const Policy> resolve_policy(const PolicySpec& spec);

std::shared_ptr<const Policy> make_dqn_policy(nn::DenseNet q_net, rl::DqnConfig config, std::string identity);
std::shared_ptr<const Policy> make_ppo_policy(rl::GaussianPolicy policy, std::string identity);

std::string_view to_string(ScriptedKind k);
ScriptedKind parse_scripted_kind(std::string_view name);

}  // namespace dtrbench::eval
