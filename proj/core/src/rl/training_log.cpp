#include "dtrbench/rl/training_log.hpp"

#include "json.hpp"

#include "dtrbench/errors.hpp"

namespace dtrbench::rl {

using nlohmann::ordered_json;

std::string training_log_json(const TrainingLog& log) {
  ordered_json j;
  j["algo"] = log.algo;
  j["env_group"] = log.env_group;
  j["prior"] = log.prior;
  j["seed"] = log.seed;
  j["warm_start_hypo_terminations"] = log.warm_start_hypo_terminations;
  j["epochs"] = ordered_json::array();
  for (const auto& e : log.epochs) {
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"env_steps", e.env_steps},
                           {"normalized_training_return", e.normalized_training_return},
                           {"mean_exploration_return", e.mean_exploration_return},
                           {"episodes_finished", e.episodes_finished},
                           {"hypo_terminations", e.hypo_terminations},
                           {"hyper_terminations", e.hyper_terminations},
                           {"mean_loss", e.mean_loss},
                           {"epsilon", e.epsilon}});
  }
  return j.dump(2);
}

TrainingLog parse_training_log(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    TrainingLog log;
    log.algo = j.at("algo").get<std::string>();
    log.env_group = j.at("env_group").get<std::string>();
    log.prior = j.at("prior").get<bool>();
    log.seed = j.at("seed").get<std::uint64_t>();
    log.warm_start_hypo_terminations = j.at("warm_start_hypo_terminations").get<int>();
    for (const auto& e : j.at("epochs")) {
      EpochLog el;
      el.epoch = e.at("epoch").get<int>();
      el.env_steps = e.at("env_steps").get<std::uint64_t>();
      el.normalized_training_return = e.at("normalized_training_return").get<double>();
      el.mean_exploration_return = e.at("mean_exploration_return").get<double>();
      el.episodes_finished = e.at("episodes_finished").get<int>();
      el.hypo_terminations = e.at("hypo_terminations").get<int>();
      el.hyper_terminations = e.at("hyper_terminations").get<int>();
      el.mean_loss = e.at("mean_loss").get<double>();
      el.epsilon = e.at("epsilon").get<double>();
      log.epochs.push_back(el);
    }
    return log;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("training log: ") + ex.what());
  }
}

}  // namespace dtrbench::rl
