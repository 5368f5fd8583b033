#include "dtrbench/eval/protocol.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "dtrbench/errors.hpp"
#include "dtrbench/random.hpp"
#include "dtrbench/risk/risk.hpp"
#include "dtrbench/sim/scenario.hpp"
#include "json.hpp"

namespace dtrbench::eval {

using nlohmann::ordered_json;

namespace {

// Bumped whenever the patient model or episode rules change meaning.
constexpr std::string_view kSimulatorVersion = "surrogate-minimal-model/1";

ordered_json scenario_json(const sim::Scenario& s) {
  ordered_json meals = ordered_json::array();
  for (const auto& m : s.meal_schedule) meals.push_back({m.time_offset, m.carbs});
  return {{"id", s.id()},
          {"start_clock", {s.episode_start_clock.day, s.episode_start_clock.minute_of_day}},
          {"initial_bg_range", {s.initial_bg_range.first, s.initial_bg_range.second}},
          {"meals", meals},
          {"jitter", {s.jitter.enabled, s.jitter.time_minutes, s.jitter.carb_fraction}}};
}

std::vector<double> collect(const std::vector<const EpisodeRecord*>& recs, double EpisodeRecord::*field) {
  std::vector<double> out;
  out.reserve(recs.size());
  for (const auto* r : recs) out.push_back(r->*field);
  return out;
}

StratumMetrics summarize(const std::string& name, const std::vector<const EpisodeRecord*>& all,
                         const EvalProtocol& p) {
  StratumMetrics m;
  m.name = name;
  std::vector<const EpisodeRecord*> ok;
  for (const auto* r : all) {
    if (r->failed) {
      ++m.failed;
    } else {
      ok.push_back(r);
    }
  }
  m.episodes = all.size();
  m.complete = m.failed == 0;
  if (ok.empty()) return m;

  std::vector<double> survival;
  for (const auto* r : ok) survival.push_back(r->survived ? 1.0 : 0.0);
  // Keyed by metric only, so a lone stratum and the overall row summarize identically.
  const auto seed_for = [&](std::string_view metric) { return mix_seed(p.bootstrap_seed, fnv1a64(metric)); };
  m.normalized_return = risk::bootstrap_ci(collect(ok, &EpisodeRecord::normalized_return),
                                           p.bootstrap_resamples, seed_for("return"));
  m.tir = risk::bootstrap_ci(collect(ok, &EpisodeRecord::tir), p.bootstrap_resamples, seed_for("tir"));
  m.survival = risk::bootstrap_ci(survival, p.bootstrap_resamples, seed_for("survival"));
  m.mean_dosage = risk::bootstrap_ci(collect(ok, &EpisodeRecord::mean_dosage), p.bootstrap_resamples,
                                     seed_for("dosage"));
  return m;
}

}  // namespace

void EvalProtocol::validate() const {
  require(!cohorts.empty(), "protocol needs at least one cohort");
  require(patients_per_cohort >= 1 && patients_per_cohort <= 4, "patients_per_cohort must be in [1, 4]");
  require(!seeds.empty(), "protocol needs at least one seed");
  require(repeats_per_seed >= 1, "repeats_per_seed must be positive");
  require(bootstrap_resamples >= 1, "bootstrap_resamples must be positive");
  require(workers >= 0, "workers must be non-negative");
  for (const auto& s : scenario_overrides) s.validate();
}

std::size_t EvalProtocol::episode_count() const {
  return cohorts.size() * static_cast<std::size_t>(patients_per_cohort) * seeds.size() *
         static_cast<std::size_t>(repeats_per_seed);
}

sim::Scenario EvalProtocol::scenario_for(sim::Cohort cohort, int patient_id) const {
  for (const auto& s : scenario_overrides)
    if (s.cohort == cohort && s.patient_id == patient_id) return s;
  return sim::default_scenario(cohort, patient_id);
}

std::string EvalProtocol::canonical_json() const {
  ordered_json j;
  j["simulator"] = kSimulatorVersion;
  ordered_json cs = ordered_json::array();
  for (auto c : cohorts) cs.push_back(sim::to_string(c));
  j["cohorts"] = cs;
  j["patients_per_cohort"] = patients_per_cohort;
  j["seeds"] = seeds;
  j["repeats_per_seed"] = repeats_per_seed;
  j["bootstrap_resamples"] = bootstrap_resamples;
  j["bootstrap_seed"] = bootstrap_seed;
  j["process_noise"] = env_options.process_noise;
  j["sensor_noise"] = env_options.sensor_noise;
  ordered_json scen = ordered_json::array();
  for (auto c : cohorts)
    for (int p = 0; p < patients_per_cohort; ++p) scen.push_back(scenario_json(scenario_for(c, p)));
  j["scenarios"] = scen;
  return j.dump();
}

std::string EvalProtocol::hash() const { return fmt::format("{:016x}", fnv1a64(canonical_json())); }

std::string_view to_string(TerminationCause c) {
  switch (c) {
    case TerminationCause::None: return "none";
    case TerminationCause::Hypoglycemia: return "hypoglycemia";
    case TerminationCause::Hyperglycemia: return "hyperglycemia";
  }
  return "none";
}

std::uint64_t episode_seed(std::uint64_t seed, int repeat) {
  return mix_seed(seed, static_cast<std::uint64_t>(repeat));
}

EpisodeRecord run_episode(const Policy& policy, const sim::Scenario& scenario, std::uint64_t seed,
                          int repeat, const sim::EnvOptions& options) {
  EpisodeRecord rec;
  rec.scenario_id = scenario.id();
  rec.cohort = scenario.cohort;
  rec.patient_id = scenario.patient_id;
  rec.seed = seed;
  rec.repeat = repeat;
  try {
    const std::uint64_t es = episode_seed(seed, repeat);
    sim::GlucoseEnv env(scenario, options);
    sim::Observation obs = env.reset(es);
    auto actor = policy.start_episode(fmt::format("{}/{}/{}", rec.scenario_id, seed, repeat), es);
    while (!env.done()) {
      const double a = actor->act(env, obs);
      const sim::StepResult r = env.step(a);
      rec.steps.push_back({r.info.bg_true, a, r.reward});
      rec.episode_return += r.reward;
      obs = r.observation;
      if (r.terminated) {
        rec.termination = r.info.bg_true < sim::kHypoTermination ? TerminationCause::Hypoglycemia
                                                                 : TerminationCause::Hyperglycemia;
      }
    }
    rec.fallback_actions = actor->fallback_actions();
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    return rec;
  }
  rec.survived = static_cast<int>(rec.steps.size()) == sim::kStepsPerEpisode &&
                 rec.termination == TerminationCause::None;
  rec.normalized_return = risk::normalized_return(rec.episode_return);
  std::vector<double> bg;
  double dose = 0.0;
  for (const auto& s : rec.steps) {
    bg.push_back(s.bg);
    dose += s.action;
  }
  rec.tir = risk::tir(bg);
  rec.mean_dosage = dose / static_cast<double>(rec.steps.size());
  return rec;
}

std::vector<EpisodeRecord> run_protocol(const Policy& policy, const EvalProtocol& protocol,
                                        std::optional<std::uint64_t> execution_order_seed) {
  protocol.validate();
  struct Task {
    sim::Scenario scenario;
    std::uint64_t seed;
    int repeat;
  };
  std::vector<Task> tasks;
  for (auto c : protocol.cohorts)
    for (int p = 0; p < protocol.patients_per_cohort; ++p) {
      const sim::Scenario sc = protocol.scenario_for(c, p);
      for (auto s : protocol.seeds)
        for (int r = 0; r < protocol.repeats_per_seed; ++r) tasks.push_back({sc, s, r});
    }

  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  if (execution_order_seed) {
    Rng rng(*execution_order_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<EpisodeRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      const Task& t = tasks[order[k]];
      records[order[k]] = run_episode(policy, t.scenario, t.seed, t.repeat, protocol.env_options);
    }
  };
  std::size_t n_workers = protocol.workers > 0 ? static_cast<std::size_t>(protocol.workers)
                                               : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, tasks.size());
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

MetricsReport aggregate(std::vector<EpisodeRecord> records, const EvalProtocol& protocol,
                        const std::string& policy_identity) {
  require(!records.empty(), "aggregate needs at least one episode record");
  // Canonical order makes the bootstrap streams independent of how records arrived.
  std::sort(records.begin(), records.end(), [](const EpisodeRecord& a, const EpisodeRecord& b) {
    return std::tie(a.cohort, a.patient_id, a.seed, a.repeat) < std::tie(b.cohort, b.patient_id, b.seed, b.repeat);
  });
  MetricsReport rep;
  rep.policy = policy_identity;
  rep.protocol_hash = protocol.hash();
  std::vector<const EpisodeRecord*> all;
  for (const auto& r : records) all.push_back(&r);
  for (auto c : sim::kAllCohorts) {
    std::vector<const EpisodeRecord*> sub;
    for (const auto* r : all)
      if (r->cohort == c) sub.push_back(r);
    if (!sub.empty()) rep.strata.push_back(summarize(std::string(sim::to_string(c)), sub, protocol));
  }
  rep.overall = summarize("overall", all, protocol);
  return rep;
}

int select_best_checkpoint(const rl::TrainingLog& log) {
  require(!log.epochs.empty(), "training log has no epochs");
  const rl::EpochLog* best = &log.epochs.front();
  for (const auto& e : log.epochs)
    if (e.normalized_training_return > best->normalized_training_return) best = &e;
  return best->epoch;
}

}  // namespace dtrbench::eval
