#include "dtrbench/rl/training_env.hpp"

#include "dtrbench/errors.hpp"
#include "dtrbench/risk/risk.hpp"

namespace dtrbench::rl {

std::string_view to_string(EnvGroup g) {
  switch (g) {
    case EnvGroup::Adult: return "adult";
    case EnvGroup::Adolescent: return "adolescent";
    case EnvGroup::Child: return "child";
    case EnvGroup::Mixed: return "mixed";
  }
  return "unknown";
}

EnvGroup parse_env_group(std::string_view name) {
  if (name == "adult") return EnvGroup::Adult;
  if (name == "adolescent") return EnvGroup::Adolescent;
  if (name == "child") return EnvGroup::Child;
  if (name == "mixed") return EnvGroup::Mixed;
  throw ContractViolation("unknown environment group '" + std::string(name) + "'");
}

std::vector<std::pair<sim::Cohort, int>> group_members(EnvGroup group) {
  std::vector<std::pair<sim::Cohort, int>> out;
  auto cohort_of = [](EnvGroup g) {
    switch (g) {
      case EnvGroup::Adult: return sim::Cohort::Adult;
      case EnvGroup::Adolescent: return sim::Cohort::Adolescent;
      default: return sim::Cohort::Child;
    }
  };
  if (group == EnvGroup::Mixed) {
    for (int pid = 0; pid < 4; ++pid)
      for (sim::Cohort c : sim::kAllCohorts) out.emplace_back(c, pid);
  } else {
    for (int pid = 0; pid < 4; ++pid) out.emplace_back(cohort_of(group), pid);
  }
  return out;
}

TrainingEnv::TrainingEnv(EnvGroup group, std::uint64_t seed, sim::EnvOptions options)
    : group_(group),
      members_(group_members(group)),
      seed_(seed),
      options_(options),
      env_(sim::default_scenario(members_.front().first, members_.front().second), options) {
  start_episode();
}

void TrainingEnv::start_episode() {
  const auto& [cohort, pid] = members_[episodes_started_ % members_.size()];
  env_ = sim::GlucoseEnv(sim::default_scenario(cohort, pid), options_);
  observation_ = env_.reset(mix_seed(seed_, 0x7A1E0000ULL + episodes_started_));
  ++episodes_started_;
  running_ = EpisodeSummary{};
}

TrainingEnv::Outcome TrainingEnv::step(double rate) {
  Outcome out;
  out.result = env_.step(rate);
  ++total_steps_;
  running_.total_return += out.result.reward;
  ++running_.steps;
  if (out.result.terminated || out.result.truncated) {
    running_.terminated = out.result.terminated;
    running_.hypoglycemia = out.result.terminated && out.result.info.bg_true < sim::kHypoTermination;
    running_.hyperglycemia =
        out.result.terminated && out.result.info.bg_true > sim::kHyperTermination;
    out.finished = running_;
    start_episode();
  } else {
    observation_ = out.result.observation;
  }
  return out;
}

double evaluate_in_group(const ActionFn& policy, EnvGroup group, std::uint64_t seed) {
  const auto members = group_members(group);
  double total = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    sim::GlucoseEnv env(sim::default_scenario(members[i].first, members[i].second));
    const std::uint64_t episode_seed = mix_seed(seed, 0xE7A1ULL + i);
    Rng rng(mix_seed(episode_seed, 1));
    sim::Observation obs = env.reset(episode_seed);
    double ret = 0.0;
    while (!env.done()) {
      const sim::StepResult r = env.step(policy(obs, rng));
      ret += r.reward;
      obs = r.observation;
    }
    total += risk::normalized_return(ret);
  }
  return total / static_cast<double>(members.size());
}

}  // namespace dtrbench::rl
