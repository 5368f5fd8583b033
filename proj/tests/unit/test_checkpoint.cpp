#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "dtrbench/errors.hpp"
#include "dtrbench/nn/checkpoint.hpp"
#include "dtrbench/rl/policy_checkpoint.hpp"

using namespace dtrbench;
using namespace dtrbench::rl;

namespace {
std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
}  // namespace

TEST_CASE("config json round trips") {
  DqnConfig d;
  d.use_prior = true;
  d.hidden = {32, 16};
  d.eps_test = 0.01;
  CHECK(dqn_config_json(parse_dqn_config_json(dqn_config_json(d))) == dqn_config_json(d));
  PpoConfig p;
  p.transform = ActionTransform::Clip;
  p.mu_offset = -0.25;
  p.conditioned_sigma = true;
  const auto back = parse_ppo_config_json(ppo_config_json(p));
  CHECK(back.transform == ActionTransform::Clip);
  CHECK(back.mu_offset.value() == -0.25);
  CHECK(ppo_config_json(back) == ppo_config_json(p));
  CHECK_THROWS_AS(parse_dqn_config_json("[1,2"), FormatError);
}

TEST_CASE("dqn checkpoint saves and loads bit-exact") {
  const auto dir = scratch("dtrbench_ckpt_dqn");
  DqnConfig cfg;
  DqnCheckpoint ck{7, nn::DenseNet::init_standard(cfg.layer_sizes(), 3), 81.5};
  const auto sidecar = save_dqn_checkpoint(dir, ck, cfg, EnvGroup::Child, 100);
  CHECK(sidecar.filename() == "epoch_07.json");
  CHECK(std::filesystem::exists(dir / "epoch_07.q.bin"));
  const auto loaded = std::get<LoadedDqn>(load_policy_checkpoint(sidecar));
  CHECK(loaded.q_net == ck.q_net);
  CHECK(loaded.meta.epoch == 7);
  CHECK(loaded.meta.seed == 100);
  CHECK(loaded.meta.env_group == "child");
  CHECK(loaded.meta.normalized_training_return == 81.5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ppo checkpoint keeps sigma and offset") {
  const auto dir = scratch("dtrbench_ckpt_ppo");
  PpoConfig cfg;
  GaussianPolicy pol(cfg, 4);
  pol.set_log_sigma(-1.25);
  PpoCheckpoint ck{2, pol, nn::DenseNet::init_standard(cfg.critic_sizes(), 5), 40.0};
  const auto sidecar = save_ppo_checkpoint(dir, ck, cfg, EnvGroup::Mixed, 1);
  const auto loaded = std::get<LoadedPpo>(load_policy_checkpoint(sidecar));
  CHECK(loaded.policy.actor() == pol.actor());
  CHECK(loaded.policy.log_sigma() == -1.25);
  CHECK(loaded.policy.mu_offset() == pol.mu_offset());
  CHECK(loaded.critic == ck.critic);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(48);
  CHECK(loaded.policy.deterministic_action(x) == pol.deterministic_action(x));
  std::filesystem::remove_all(dir);
}

TEST_CASE("broken checkpoints fail with typed errors") {
  const auto dir = scratch("dtrbench_ckpt_bad");
  CHECK_THROWS_AS(load_policy_checkpoint(dir / "nope.json"), IoError);
  DqnConfig cfg;
  DqnCheckpoint ck{1, nn::DenseNet::init_standard(cfg.layer_sizes(), 3), 0};
  const auto sidecar = save_dqn_checkpoint(dir, ck, cfg, EnvGroup::Adult, 1);
  // swap in weights of the wrong shape
  nn::save_params(nn::DenseNet::init_standard({48, 8, 11}, 1), dir / "epoch_01.q.bin");
  CHECK_THROWS_AS(load_policy_checkpoint(sidecar), nn::CheckpointMismatch);
  std::ofstream(dir / "garbage.json") << "{\"algo\": 3";
  CHECK_THROWS_AS(load_policy_checkpoint(dir / "garbage.json"), FormatError);
  std::filesystem::remove_all(dir);
}
