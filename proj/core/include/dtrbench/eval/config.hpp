#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dtrbench/eval/protocol.hpp"
#include "dtrbench/llm/client.hpp"
#include "dtrbench/rl/dqn.hpp"
#include "dtrbench/rl/ppo.hpp"

namespace dtrbench::eval {

/// Everything a run needs. Loaded from YAML with sections mirroring the hyperparameter tables:
///
///   common:  lr, batch_size, gamma, eps_test, exploration_noise, use_expert_knowledge, seeds,
///            hidden, epochs, steps_per_epoch
///   dqn:     target_update_freq, update_per_step, eps_train_start, eps_train_end,
///            warm_start_steps, replay_capacity
///   ppo:     steps_per_collect, repeat_per_collect, gae_lambda, conditioned_sigma, vf_coef,
///            ent_coef, clip_eps, value_clip, advantage_normalization, mu_offset, sigma_init,
///            init_scale, warm_start_steps
///   llm:     base_url, model, temperature, max_tokens, request_timeout, max_retries,
///            fallback_dose, max_in_flight
///   eval:    seeds, repeats_per_seed, patients_per_cohort, bootstrap_resamples,
///            bootstrap_seed, workers, process_noise, sensor_noise, scenarios (file list)
///
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
  rl::DqnConfig dqn;
  rl::PpoConfig ppo;
  llm::LlmConfig llm;
  EvalProtocol protocol;
  std::vector<std::uint64_t> train_seeds{1, 100, 1000, 10000};
  bool use_expert_knowledge = false;
};

/// Scenario paths are resolved against `base_dir`.
RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Prior on: zero-biased DQN exploration and the tanh PPO transform. Off: uniform and clip.
void apply_prior(RunConfig& config, bool prior);

/// Canonical JSON of the whole config, and 16 hex digits of its FNV-1a hash.
std::string run_config_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

}  // namespace dtrbench::eval
