#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dtrbench::rl {

struct EpochLog {
  int epoch = 0;  // 1-based
  std::uint64_t env_steps = 0;
  double normalized_training_return = 0;  // checkpoint score in the training environment
  double mean_exploration_return = 0;     // normalized, over episodes finished this epoch
  int episodes_finished = 0;
  int hypo_terminations = 0;
  int hyper_terminations = 0;
  double mean_loss = 0;
  double epsilon = 0;  // DQN only: exploration rate at the end of the epoch
};

struct TrainingLog {
  std::string algo;
  std::string env_group;
  bool prior = false;
  std::uint64_t seed = 0;
  int warm_start_hypo_terminations = 0;
  std::vector<EpochLog> epochs;
};

std::string training_log_json(const TrainingLog& log);
TrainingLog parse_training_log(const std::string& json_text);

}  // namespace dtrbench::rl
