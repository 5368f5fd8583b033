#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "dtrbench/rl/dqn.hpp"
#include "dtrbench/rl/ppo.hpp"

namespace dtrbench::rl {

std::string dqn_config_json(const DqnConfig& config);
DqnConfig parse_dqn_config_json(const std::string& text);
std::string ppo_config_json(const PpoConfig& config);
PpoConfig parse_ppo_config_json(const std::string& text);

struct CheckpointMeta {
  std::string algo;  // "dqn" or "ppo"
  std::string env_group;
  std::uint64_t seed = 0;
  int epoch = 0;
  double normalized_training_return = 0;
};

struct LoadedDqn {
  CheckpointMeta meta;
  DqnConfig config;
  nn::DenseNet q_net;
};

struct LoadedPpo {
  CheckpointMeta meta;
  PpoConfig config;
  GaussianPolicy policy;
  nn::DenseNet critic;
};

using LoadedPolicy = std::variant<LoadedDqn, LoadedPpo>;

/// "epoch_07"
std::string checkpoint_stem(int epoch);

/// Writes <stem>.q.bin (DQN) or <stem>.actor.bin + <stem>.critic.bin (PPO) next to a
/// <stem>.json sidecar holding config, seed, epoch and training return. Returns the sidecar.
std::filesystem::path save_dqn_checkpoint(const std::filesystem::path& dir, const DqnCheckpoint& ckpt,
                                          const DqnConfig& config, EnvGroup group, std::uint64_t seed);
std::filesystem::path save_ppo_checkpoint(const std::filesystem::path& dir, const PpoCheckpoint& ckpt,
                                          const PpoConfig& config, EnvGroup group, std::uint64_t seed);

/// Loads from a sidecar path. Throws IoError / FormatError / CheckpointMismatch.
LoadedPolicy load_policy_checkpoint(const std::filesystem::path& sidecar);

}  // namespace dtrbench::rl
