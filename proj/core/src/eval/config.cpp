#include "dtrbench/eval/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "dtrbench/errors.hpp"
#include "dtrbench/rl/policy_checkpoint.hpp"
#include "dtrbench/sim/scenario.hpp"
#include "json.hpp"

namespace dtrbench::eval {

namespace {

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node) return;
  if (!node.IsMap()) throw FormatError("config section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw FormatError("unknown config key '" + section + "." + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

}  // namespace

void apply_prior(RunConfig& c, bool prior) {
  c.use_expert_knowledge = prior;
  c.dqn.use_prior = prior;
  c.ppo.transform = prior ? rl::ActionTransform::Tanh : rl::ActionTransform::Clip;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw FormatError("config must be a mapping");
  check_keys(root, "", {"common", "dqn", "ppo", "llm", "eval"});
  try {
    const YAML::Node common = root["common"], dqn = root["dqn"], ppo = root["ppo"], llm = root["llm"],
                     ev = root["eval"];
    check_keys(common, "common", {"lr", "batch_size", "gamma", "eps_test", "exploration_noise",
                                  "use_expert_knowledge", "seeds", "hidden", "epochs", "steps_per_epoch"});
    check_keys(dqn, "dqn", {"target_update_freq", "update_per_step", "eps_train_start", "eps_train_end",
                            "warm_start_steps", "replay_capacity"});
    check_keys(ppo, "ppo", {"steps_per_collect", "repeat_per_collect", "gae_lambda", "conditioned_sigma",
                            "vf_coef", "ent_coef", "clip_eps", "value_clip", "advantage_normalization",
                            "mu_offset", "sigma_init", "init_scale", "warm_start_steps"});
    check_keys(llm, "llm", {"base_url", "model", "temperature", "max_tokens", "request_timeout", "max_retries",
                            "fallback_dose", "max_in_flight"});
    check_keys(ev, "eval", {"seeds", "repeats_per_seed", "patients_per_cohort", "bootstrap_resamples",
                            "bootstrap_seed", "workers", "process_noise", "sensor_noise", "scenarios"});

    double lr = c.dqn.lr;
    read(common, "lr", lr);
    c.dqn.lr = c.ppo.lr = lr;
    read(common, "batch_size", c.dqn.batch_size);
    c.ppo.batch_size = c.dqn.batch_size;
    read(common, "gamma", c.dqn.gamma);
    c.ppo.gamma = c.dqn.gamma;
    read(common, "eps_test", c.dqn.eps_test);
    read(common, "exploration_noise", c.ppo.exploration_noise);
    read(common, "seeds", c.train_seeds);
    read(common, "hidden", c.dqn.hidden);
    c.ppo.hidden = c.dqn.hidden;
    read(common, "epochs", c.dqn.epochs);
    c.ppo.epochs = c.dqn.epochs;
    read(common, "steps_per_epoch", c.dqn.steps_per_epoch);
    c.ppo.steps_per_epoch = c.dqn.steps_per_epoch;
    bool prior = false;
    read(common, "use_expert_knowledge", prior);
    apply_prior(c, prior);

    read(dqn, "target_update_freq", c.dqn.target_sync_every);
    read(dqn, "update_per_step", c.dqn.updates_per_step);
    read(dqn, "eps_train_start", c.dqn.eps_train_start);
    read(dqn, "eps_train_end", c.dqn.eps_train_end);
    read(dqn, "warm_start_steps", c.dqn.warm_start_steps);
    read(dqn, "replay_capacity", c.dqn.replay_capacity);

    read(ppo, "steps_per_collect", c.ppo.steps_per_collect);
    read(ppo, "repeat_per_collect", c.ppo.repeat_per_collect);
    read(ppo, "gae_lambda", c.ppo.gae_lambda);
    read(ppo, "conditioned_sigma", c.ppo.conditioned_sigma);
    read(ppo, "vf_coef", c.ppo.value_coef);
    read(ppo, "ent_coef", c.ppo.entropy_coef);
    read(ppo, "clip_eps", c.ppo.clip_eps);
    read(ppo, "value_clip", c.ppo.value_clip);
    read(ppo, "advantage_normalization", c.ppo.advantage_normalization);
    if (ppo && ppo["mu_offset"]) c.ppo.mu_offset = ppo["mu_offset"].as<double>();
    read(ppo, "sigma_init", c.ppo.sigma_init);
    read(ppo, "init_scale", c.ppo.init_scale);
    read(ppo, "warm_start_steps", c.ppo.warm_start_steps);

    read(llm, "base_url", c.llm.base_url);
    read(llm, "model", c.llm.model_name);
    read(llm, "temperature", c.llm.temperature);
    if (llm && llm["max_tokens"]) c.llm.max_tokens = llm["max_tokens"].as<int>();
    read(llm, "request_timeout", c.llm.request_timeout);
    read(llm, "max_retries", c.llm.max_retries);
    read(llm, "fallback_dose", c.llm.fallback_dose);
    read(llm, "max_in_flight", c.llm.max_in_flight);

    read(ev, "seeds", c.protocol.seeds);
    read(ev, "repeats_per_seed", c.protocol.repeats_per_seed);
    read(ev, "patients_per_cohort", c.protocol.patients_per_cohort);
    read(ev, "bootstrap_resamples", c.protocol.bootstrap_resamples);
    read(ev, "bootstrap_seed", c.protocol.bootstrap_seed);
    read(ev, "workers", c.protocol.workers);
    read(ev, "process_noise", c.protocol.env_options.process_noise);
    read(ev, "sensor_noise", c.protocol.env_options.sensor_noise);
    if (ev && ev["scenarios"]) {
      for (const auto& p : ev["scenarios"]) {
        std::filesystem::path path = p.as<std::string>();
        if (path.is_relative()) path = base_dir / path;
        c.protocol.scenario_overrides.push_back(sim::load_scenario_file(path).scenario);
      }
    }
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("config has a bad value: ") + e.what());
  }
  try {
    c.dqn.validate();
    c.ppo.validate();
    c.llm.validate();
    c.protocol.validate();
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("config is invalid: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string run_config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["dqn"] = nlohmann::ordered_json::parse(rl::dqn_config_json(c.dqn));
  j["ppo"] = nlohmann::ordered_json::parse(rl::ppo_config_json(c.ppo));
  j["llm"] = {{"base_url", c.llm.base_url},
              {"model", c.llm.model_name},
              {"temperature", c.llm.temperature},
              {"max_tokens", c.llm.max_tokens ? nlohmann::ordered_json(*c.llm.max_tokens) : nlohmann::ordered_json()},
              {"request_timeout", c.llm.request_timeout},
              {"max_retries", c.llm.max_retries},
              {"fallback_dose", c.llm.fallback_dose},
              {"max_in_flight", c.llm.max_in_flight}};
  j["protocol"] = nlohmann::ordered_json::parse(c.protocol.canonical_json());
  j["train_seeds"] = c.train_seeds;
  j["use_expert_knowledge"] = c.use_expert_knowledge;
  return j.dump();
}

std::string config_hash(const RunConfig& c) { return fmt::format("{:016x}", fnv1a64(run_config_json(c))); }

}  // namespace dtrbench::eval
