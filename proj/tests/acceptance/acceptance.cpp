// Acceptance run: one line per criterion, non-zero exit if any fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "dtrbench/eval/config.hpp"
#include "dtrbench/eval/policy.hpp"
#include "dtrbench/eval/protocol.hpp"
#include "dtrbench/eval/report.hpp"
#include "dtrbench/llm/client.hpp"
#include "dtrbench/llm/mock_server.hpp"
#include "dtrbench/llm/parse.hpp"
#include "dtrbench/llm/prompts.hpp"
#include "dtrbench/risk/bootstrap.hpp"
#include "dtrbench/risk/risk.hpp"
#include "dtrbench/rl/dqn.hpp"
#include "dtrbench/rl/gae.hpp"
#include "dtrbench/rl/ppo.hpp"
#include "dtrbench/rl/squash.hpp"
#include "dtrbench/sim/patient.hpp"
#include "grad_check.hpp"
#include "oracles.hpp"
#include "sim_probes.hpp"

using namespace dtrbench;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

const std::vector<std::uint64_t> kSeeds{1, 100, 1000, 10000};

Verdict exploration_formula() {
  const double p0 = rl::zero_biased_probs(11).p0;
  double worst = 0;
  for (int n = 2; n <= 101; ++n) {
    const auto d = rl::zero_biased_probs(n);
    const double want = static_cast<double>(n) * (n + 1) / (n - 1);
    worst = std::max(worst, std::abs(d.p0 / d.p_other - want));
  }
  return {std::abs(p0 - 0.5690) <= 1e-4 && worst <= 1e-10,
          fmt::format("p0(11)={:.6f} max|ratio err|={:.2e}", p0, worst)};
}

Verdict risk_oracle() {
  double worst = 0;
  for (int bg = 41; bg <= 499; ++bg) {
    worst = std::max(worst, std::abs(risk::risk_index(bg).ri - static_cast<double>(oracle::risk_index(bg))));
    worst = std::max(worst, std::abs(risk::step_reward(bg, false) - static_cast<double>(oracle::reward(bg, false))));
    worst = std::max(worst, std::abs(risk::step_reward(bg, true) - static_cast<double>(oracle::reward(bg, true))));
  }
  const double root = static_cast<double>(oracle::bisect(oracle::f_bg, 50.0L, 300.0L));
  const double r = risk::step_reward(root, false);
  return {worst <= 1e-9 && root >= 112 && root <= 114 && r >= 0.999 && r <= 1.0,
          fmt::format("max|diff|={:.2e} root={:.4f} reward(root)={:.12f}", worst, root, r)};
}

Verdict return_normalization() {
  const double lo = risk::normalized_return(-99.7);
  const double hi = risk::normalized_return(64.0);
  const double root = static_cast<double>(oracle::bisect(oracle::f_bg, 50.0L, 300.0L));
  double total = 0;
  for (int t = 0; t < 64; ++t) total += risk::step_reward(root, false);
  const double pinned = risk::normalized_return(total);
  return {lo == 0.0 && hi == 100.0 && pinned >= 99.0,
          fmt::format("-99.7->{} 64->{} pinned-at-root={:.6f}", lo, hi, pinned)};
}

Verdict tanh_density() {
  Rng rng(2024);
  double worst_mass = 0, worst_grad = 0;
  for (int i = 0; i < 20; ++i) {
    const double mu = uniform(rng, -2.0, 2.0);
    const double sigma = uniform(rng, 0.3, 1.5);
    const double mass = oracle::simpson(
        [&](double a) { return a <= 0.0 || a >= 9.0 ? 0.0 : std::exp(rl::log_prob_tanh(a, mu, sigma)); },
        0.0, 9.0, 200000);
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    const double a = uniform(rng, 0.1, 8.9);
    const auto g = rl::log_prob_tanh_grad(a, mu, sigma);
    const double h = 1e-5;
    const double fd_mu = oracle::central_diff([&](double m) { return rl::log_prob_tanh(a, m, sigma); }, mu, h);
    const double fd_s = oracle::central_diff([&](double s) { return rl::log_prob_tanh(a, mu, s); }, sigma, h);
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1e-8, std::max(std::abs(x), std::abs(y))); };
    worst_grad = std::max({worst_grad, rel(g.d_mu, fd_mu), rel(g.d_sigma, fd_s)});
  }
  return {worst_mass <= 1e-3 && worst_grad < 1e-4,
          fmt::format("max|mass-1|={:.2e} max grad rel err={:.2e}", worst_mass, worst_grad)};
}

Verdict gae_oracle() {
  Rng rng(77);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    std::vector<double> r(n), v(n), nv(n);
    std::vector<bool> end(n);
    bool flags[6];
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = uniform(rng, -3, 3);
      v[i] = uniform(rng, -3, 3);
      const bool term = uniform_index(rng, 5) == 0;
      nv[i] = term ? 0.0 : uniform(rng, -3, 3);
      end[i] = flags[i] = term || i + 1 == n || uniform_index(rng, 6) == 0;
    }
    const double gamma = uniform(rng, 0.8, 1.0), lambda = uniform(rng, 0.0, 1.0);
    const auto ref = oracle::brute_gae(r, v, nv, end, gamma, lambda);
    const auto got = rl::gae(r, v, nv, std::span<const bool>(flags, n), gamma, lambda);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(ref[i] - got.advantages[i]));
  }
  return {worst <= 1e-10, fmt::format("1000 instances, max|diff|={:.2e}", worst)};
}

Verdict neural_gradients() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) worst = std::max(worst, gradcheck::random_net_error(seed));
  return {worst < 1e-4, fmt::format("50 nets, max rel err={:.2e}", worst)};
}

Verdict calibration() {
  const double drop = probes::peak_drop(sim::make_patient(sim::Cohort::Child, 0), 2.36);
  int ordered = 0, total = 0;
  double mean[3] = {0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int id = 0; id < 4; ++id) {
      double v[3];
      for (int c = 0; c < 3; ++c) {
        v[c] = probes::meal_volatility(sim::make_patient(sim::kAllCohorts[c], id), seed);
        mean[c] += v[c] / 80.0;
      }
      // kAllCohorts is adult, adolescent, child
      ordered += v[2] > v[1] && v[1] > v[0];
      ++total;
    }
  }
  return {std::abs(drop - 59.0) <= 12.0 && ordered == total,
          fmt::format("peak drop={:.2f} mg/dL; ordering {}/{} (mean std child {:.2f} > adolescent {:.2f} > adult {:.2f})",
                      drop, ordered, total, mean[2], mean[1], mean[0])};
}

eval::RunConfig run_config(bool prior) {
  eval::RunConfig c;
  eval::apply_prior(c, prior);
  return c;
}

Verdict training_smoke() {
  const auto cfg = run_config(false);
  eval::EvalProtocol child = cfg.protocol;
  child.cohorts = {sim::Cohort::Child};

  std::vector<std::future<rl::DqnRun>> dqn;
  std::vector<std::future<rl::PpoRun>> ppo;
  auto ppo_cfg = cfg.ppo;
  ppo_cfg.transform = rl::ActionTransform::Tanh;
  for (auto s : kSeeds) {
    dqn.push_back(std::async(std::launch::async, [&, s] { return rl::train_dqn(rl::EnvGroup::Child, cfg.dqn, s); }));
    ppo.push_back(std::async(std::launch::async, [&, s] { return rl::train_ppo(rl::EnvGroup::Child, ppo_cfg, s); }));
  }

  const auto random = eval::resolve_policy(eval::PolicySpec{eval::ScriptedPolicySpec{eval::ScriptedKind::Random012}});
  const double random_ret = eval::aggregate(eval::run_protocol(*random, child), child, "random")
                                .overall.normalized_return.mean;

  double sum = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    const auto run = dqn[i].get();
    const int best = eval::select_best_checkpoint(run.log);
    const auto pol = eval::make_dqn_policy(run.checkpoints[static_cast<std::size_t>(best - 1)].q_net, cfg.dqn, "dqn");
    const double ret = eval::aggregate(eval::run_protocol(*pol, child), child, "dqn").overall.normalized_return.mean;
    sum += ret;
    per_seed += fmt::format(" {}:{:.1f}(ep{})", kSeeds[i], ret, best);
  }
  const double dqn_mean = sum / static_cast<double>(kSeeds.size());

  bool ppo_finite = true;
  std::string ppo_note;
  for (auto& f : ppo) {
    try {
      const auto run = f.get();
      for (const auto& e : run.log.epochs) ppo_finite = ppo_finite && std::isfinite(e.mean_loss);
      ppo_finite = ppo_finite && run.checkpoints.size() == 20;
    } catch (const TrainingFault& e) {
      ppo_finite = false;
      ppo_note = e.what();
    }
  }
  return {dqn_mean - random_ret >= 10.0 && ppo_finite,
          fmt::format("DQN child best-ckpt mean {:.2f} vs random {:.2f} (+{:.2f});{} PPO tanh finite={}{}",
                      dqn_mean, random_ret, dqn_mean - random_ret, per_seed, ppo_finite ? "yes" : "no",
                      ppo_note.empty() ? "" : " " + ppo_note)};
}

Verdict prior_direction() {
  const auto on = run_config(true), off = run_config(false);
  std::vector<std::future<rl::DqnRun>> with, without;
  for (auto s : kSeeds) {
    with.push_back(std::async(std::launch::async, [&, s] { return rl::train_dqn(rl::EnvGroup::Adult, on.dqn, s); }));
    without.push_back(std::async(std::launch::async, [&, s] { return rl::train_dqn(rl::EnvGroup::Adult, off.dqn, s); }));
  }
  double h_on = 0, h_off = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    const int a = with[i].get().log.epochs.front().hypo_terminations;
    const int b = without[i].get().log.epochs.front().hypo_terminations;
    h_on += a / 4.0;
    h_off += b / 4.0;
    per_seed += fmt::format(" {}:{}/{}", kSeeds[i], a, b);
  }
  return {h_on < h_off, fmt::format("first-epoch hypo terminations, mean with prior {:.2f} < without {:.2f};{}",
                                    h_on, h_off, per_seed)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict llm_pipeline() {
  std::vector<std::string> notes;
  bool ok = true;

  // Golden prompts.
  int golden_ok = 0;
  for (auto k : llm::kAllPromptKinds) {
    const auto want = slurp(std::string(DTRBENCH_GOLDEN_DIR) + "/prompt_" + std::string(llm::to_string(k)) + ".txt");
    golden_ok += !want.empty() && llm::render_prompt(k, "<Observation>") == want;
  }
  ok = ok && golden_ok == 4;
  notes.push_back(fmt::format("golden {}/4", golden_ok));

  // Parser suite.
  const auto cot = llm::parse_cot("The trend is falling, so the final insulin rate is <ans>2.84</ans>");
  const auto big = llm::clamp_action(130.67);
  const bool parse_ok = cot.dose && std::abs(*cot.dose - 2.84) < 1e-12 && big.dose && *big.dose == 9.0 &&
                        big.status == llm::ParseStatus::Clamped;
  llm::LlmAction junk;
  {
    llm::MockLlmServer server({{"junk"}});
    llm::LlmConfig c;
    c.base_url = server.base_url();
    c.max_retries = 2;
    c.temperature = 0;
    sim::HistoryEntry e;
    e.glucose_sensor = 140;
    junk = llm::LlmClient(c).act({e}, llm::PromptKind::BaseZeroShot);
  }
  const bool junk_ok = junk.action == 0.0 && junk.status == llm::ActStatus::FallbackUsed && junk.exchanges.size() == 3;
  ok = ok && parse_ok && junk_ok;
  notes.push_back(fmt::format("parse 2.84={} clamp 130.67->{} junk->{} after {} attempts", cot.dose ? *cot.dose : NAN,
                              big.dose ? *big.dose : NAN, junk.action, junk.exchanges.size()));

  // Full protocol twice against fresh mock servers.
  const std::vector<llm::MockReply> script{{"0"}, {"Let me think. <ans>0.5</ans>"}, {"0"}, {"1"}, {"0.2"}};
  eval::EvalProtocol proto;
  proto.workers = 1;
  std::vector<std::string> reports;
  std::size_t records = 0;
  for (int run = 0; run < 2; ++run) {
    llm::MockLlmServer server(script);
    eval::LlmPolicySpec spec;
    spec.kind = llm::PromptKind::PriorCot;
    spec.config.base_url = server.base_url();
    spec.config.temperature = 0.0;
    spec.config.model_name = "mock";
    const auto pol = eval::resolve_policy(eval::PolicySpec{spec});
    const auto recs = eval::run_protocol(*pol, proto);
    records = recs.size();
    reports.push_back(eval::report_json(eval::aggregate(recs, proto, pol->identity())));
  }
  const bool stable = records == 240 && reports[0] == reports[1];
  ok = ok && stable;
  notes.push_back(fmt::format("{} episodes, report bytes identical={} ({} bytes)", records,
                              reports[0] == reports[1] ? "yes" : "no", reports[0].size()));
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {ok, detail};
}

Verdict protocol_arithmetic() {
  eval::EvalProtocol p;
  const auto pol = eval::resolve_policy(eval::PolicySpec{eval::ScriptedPolicySpec{eval::ScriptedKind::Zero}});
  const auto recs = eval::run_protocol(*pol, p);
  const std::vector<double> constant(240, 0.8125);
  const auto ci = risk::bootstrap_ci(constant, 1000, 9);
  return {recs.size() == 240 && p.episode_count() == 240 && ci.ci_high - ci.ci_low == 0.0,
          fmt::format("records={} constant-data CI width={}", recs.size(), ci.ci_high - ci.ci_low)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"exploration formula", exploration_formula},
      {"risk math oracle", risk_oracle},
      {"return normalization", return_normalization},
      {"tanh density", tanh_density},
      {"gae oracle", gae_oracle},
      {"neural gradients", neural_gradients},
      {"simulator calibration", calibration},
      {"training smoke", training_smoke},
      {"prior direction", prior_direction},
      {"llm pipeline determinism", llm_pipeline},
      {"metrics protocol arithmetic", protocol_arithmetic},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    fmt::print("{} {:2d} {:<28} {} [{:.1f}s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail, secs);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
