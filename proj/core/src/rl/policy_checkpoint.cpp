#include "dtrbench/rl/policy_checkpoint.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "dtrbench/nn/checkpoint.hpp"
#include "json.hpp"

namespace dtrbench::rl {

using nlohmann::ordered_json;

namespace {

ordered_json dqn_json(const DqnConfig& c) {
  return {{"n_actions", c.n_actions},
          {"gamma", c.gamma},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"target_sync_every", c.target_sync_every},
          {"eps_train_start", c.eps_train_start},
          {"eps_train_end", c.eps_train_end},
          {"eps_test", c.eps_test},
          {"use_prior", c.use_prior},
          {"warm_start_steps", c.warm_start_steps},
          {"replay_capacity", c.replay_capacity},
          {"hidden", c.hidden},
          {"epochs", c.epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"updates_per_step", c.updates_per_step}};
}

DqnConfig dqn_from(const ordered_json& j) {
  DqnConfig c;
  c.n_actions = j.at("n_actions");
  c.gamma = j.at("gamma");
  c.lr = j.at("lr");
  c.batch_size = j.at("batch_size");
  c.target_sync_every = j.at("target_sync_every");
  c.eps_train_start = j.at("eps_train_start");
  c.eps_train_end = j.at("eps_train_end");
  c.eps_test = j.at("eps_test");
  c.use_prior = j.at("use_prior");
  c.warm_start_steps = j.at("warm_start_steps");
  c.replay_capacity = j.at("replay_capacity");
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.epochs = j.at("epochs");
  c.steps_per_epoch = j.at("steps_per_epoch");
  c.updates_per_step = j.at("updates_per_step");
  c.validate();
  return c;
}

ordered_json ppo_json(const PpoConfig& c) {
  return {{"steps_per_collect", c.steps_per_collect},
          {"repeat_per_collect", c.repeat_per_collect},
          {"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_eps", c.clip_eps},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"conditioned_sigma", c.conditioned_sigma},
          {"value_clip", c.value_clip},
          {"advantage_normalization", c.advantage_normalization},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"transform", std::string(to_string(c.transform))},
          {"d_max", c.d_max},
          {"mu_offset", c.mu_offset ? ordered_json(*c.mu_offset) : ordered_json(nullptr)},
          {"sigma_init", c.sigma_init},
          {"exploration_noise", c.exploration_noise},
          {"init_scale", c.init_scale},
          {"hidden", c.hidden},
          {"epochs", c.epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"warm_start_steps", c.warm_start_steps}};
}

PpoConfig ppo_from(const ordered_json& j) {
  PpoConfig c;
  c.steps_per_collect = j.at("steps_per_collect");
  c.repeat_per_collect = j.at("repeat_per_collect");
  c.gamma = j.at("gamma");
  c.gae_lambda = j.at("gae_lambda");
  c.clip_eps = j.at("clip_eps");
  c.value_coef = j.at("value_coef");
  c.entropy_coef = j.at("entropy_coef");
  c.conditioned_sigma = j.at("conditioned_sigma");
  c.value_clip = j.at("value_clip");
  c.advantage_normalization = j.at("advantage_normalization");
  c.lr = j.at("lr");
  c.batch_size = j.at("batch_size");
  c.transform = parse_action_transform(j.at("transform").get<std::string>());
  c.d_max = j.at("d_max");
  if (!j.at("mu_offset").is_null()) c.mu_offset = j.at("mu_offset").get<double>();
  c.sigma_init = j.at("sigma_init");
  c.exploration_noise = j.at("exploration_noise");
  c.init_scale = j.at("init_scale");
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.epochs = j.at("epochs");
  c.steps_per_epoch = j.at("steps_per_epoch");
  c.warm_start_steps = j.at("warm_start_steps");
  c.validate();
  return c;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json meta_json(std::string_view algo, EnvGroup group, std::uint64_t seed, int epoch,
                       double training_return) {
  return {{"algo", algo},
          {"env_group", to_string(group)},
          {"seed", seed},
          {"epoch", epoch},
          {"normalized_training_return", training_return}};
}

}  // namespace

std::string dqn_config_json(const DqnConfig& c) { return dqn_json(c).dump(); }
DqnConfig parse_dqn_config_json(const std::string& t) {
  return guarded("dqn config", [&] { return dqn_from(ordered_json::parse(t)); });
}
std::string ppo_config_json(const PpoConfig& c) { return ppo_json(c).dump(); }
PpoConfig parse_ppo_config_json(const std::string& t) {
  return guarded("ppo config", [&] { return ppo_from(ordered_json::parse(t)); });
}

std::string checkpoint_stem(int epoch) { return fmt::format("epoch_{:02d}", epoch); }

std::filesystem::path save_dqn_checkpoint(const std::filesystem::path& dir, const DqnCheckpoint& ckpt,
                                          const DqnConfig& config, EnvGroup group, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::string stem = checkpoint_stem(ckpt.epoch);
  nn::save_params(ckpt.q_net, dir / (stem + ".q.bin"));
  ordered_json side = meta_json("dqn", group, seed, ckpt.epoch, ckpt.normalized_training_return);
  side["config"] = dqn_json(config);
  side["q_net"] = stem + ".q.bin";
  const auto path = dir / (stem + ".json");
  write_text(path, side.dump(2) + "\n");
  return path;
}

std::filesystem::path save_ppo_checkpoint(const std::filesystem::path& dir, const PpoCheckpoint& ckpt,
                                          const PpoConfig& config, EnvGroup group, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::string stem = checkpoint_stem(ckpt.epoch);
  nn::save_params(ckpt.policy.actor(), dir / (stem + ".actor.bin"));
  nn::save_params(ckpt.critic, dir / (stem + ".critic.bin"));
  ordered_json side = meta_json("ppo", group, seed, ckpt.epoch, ckpt.normalized_training_return);
  side["config"] = ppo_json(config);
  side["actor"] = stem + ".actor.bin";
  side["critic"] = stem + ".critic.bin";
  side["log_sigma"] = ckpt.policy.log_sigma();
  side["mu_offset"] = ckpt.policy.mu_offset();
  const auto path = dir / (stem + ".json");
  write_text(path, side.dump(2) + "\n");
  return path;
}

LoadedPolicy load_policy_checkpoint(const std::filesystem::path& sidecar) {
  const std::string text = read_text(sidecar);
  const auto dir = sidecar.parent_path();
  return guarded("checkpoint sidecar", [&]() -> LoadedPolicy {
    const ordered_json j = ordered_json::parse(text);
    CheckpointMeta meta;
    meta.algo = j.at("algo").get<std::string>();
    meta.env_group = j.at("env_group").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.epoch = j.at("epoch").get<int>();
    meta.normalized_training_return = j.at("normalized_training_return").get<double>();
    if (meta.algo == "dqn") {
      LoadedDqn out{meta, dqn_from(j.at("config")), {}};
      out.q_net = nn::load_params(dir / j.at("q_net").get<std::string>(), out.config.layer_sizes());
      return out;
    }
    if (meta.algo == "ppo") {
      PpoConfig cfg = ppo_from(j.at("config"));
      nn::DenseNet actor = nn::load_params(dir / j.at("actor").get<std::string>(), cfg.actor_sizes());
      nn::DenseNet critic = nn::load_params(dir / j.at("critic").get<std::string>(), cfg.critic_sizes());
      GaussianPolicy policy(std::move(actor), j.at("log_sigma").get<double>(), cfg.transform, cfg.d_max,
                            j.at("mu_offset").get<double>(), cfg.conditioned_sigma, cfg.sigma_init);
      return LoadedPpo{meta, cfg, std::move(policy), std::move(critic)};
    }
    throw FormatError("unknown checkpoint algo '" + meta.algo + "'");
  });
}

}  // namespace dtrbench::rl
