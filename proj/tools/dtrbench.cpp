// dtrbench: train small agents, evaluate any policy on the stratified protocol, compare reports,
// and serve a scripted chat-completions mock.

#include <fmt/format.h>

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dtrbench/eval/config.hpp"
#include "dtrbench/eval/policy.hpp"
#include "dtrbench/eval/protocol.hpp"
#include "dtrbench/eval/report.hpp"
#include "dtrbench/llm/mock_server.hpp"
#include "dtrbench/random.hpp"
#include "dtrbench/rl/policy_checkpoint.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dtrbench;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

fs::path make_run_dir(const fs::path& root, const std::string& kind, const std::string& fingerprint) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm);
  const fs::path dir = root / fmt::format("{}-{}-{:016x}", stamp, kind, fnv1a64(fingerprint));
  fs::create_directories(dir);
  return dir;
}

eval::RunConfig config_from(const std::string& path) {
  return path.empty() ? eval::RunConfig{} : eval::load_run_config(path);
}

// A training run directory resolves to its best checkpoint; a sidecar path is used as is.
fs::path resolve_checkpoint(const fs::path& p) {
  if (!fs::is_directory(p)) return p;
  const auto log = rl::parse_training_log(read_file(p / "training_log.json"));
  const int best = eval::select_best_checkpoint(log);
  return p / "checkpoints" / (rl::checkpoint_stem(best) + ".json");
}

struct TrainArgs {
  std::string algo = "dqn";
  std::string env = "child";
  std::string prior = "off";
  std::uint64_t seed = 1;
  std::string config;
  std::string out = "runs";
};

int cmd_train(const TrainArgs& a) {
  eval::RunConfig cfg = config_from(a.config);
  eval::apply_prior(cfg, a.prior == "on");
  const rl::EnvGroup group = rl::parse_env_group(a.env);
  const std::string fingerprint = eval::run_config_json(cfg) + a.algo + a.env + std::to_string(a.seed);
  const fs::path dir = make_run_dir(a.out, "train-" + a.algo + "-" + a.env, fingerprint);
  const fs::path ckpt_dir = dir / "checkpoints";
  write_file(dir / "config.json", eval::run_config_json(cfg) + "\n");

  rl::TrainingLog log;
  if (a.algo == "dqn") {
    auto run = rl::train_dqn(group, cfg.dqn, a.seed, [&](const rl::DqnCheckpoint& c, const rl::EpochLog& e) {
      rl::save_dqn_checkpoint(ckpt_dir, c, cfg.dqn, group, a.seed);
      fmt::print("epoch {:2d}  steps {:5d}  train return {:6.2f}  hypo {:2d}  hyper {:2d}  loss {:.4g}\n", e.epoch,
                 e.env_steps, e.normalized_training_return, e.hypo_terminations, e.hyper_terminations, e.mean_loss);
    });
    log = run.log;
  } else if (a.algo == "ppo") {
    auto run = rl::train_ppo(group, cfg.ppo, a.seed, [&](const rl::PpoCheckpoint& c, const rl::EpochLog& e) {
      rl::save_ppo_checkpoint(ckpt_dir, c, cfg.ppo, group, a.seed);
      fmt::print("epoch {:2d}  steps {:5d}  train return {:6.2f}  hypo {:2d}  hyper {:2d}  loss {:.4g}\n", e.epoch,
                 e.env_steps, e.normalized_training_return, e.hypo_terminations, e.hyper_terminations, e.mean_loss);
    });
    log = run.log;
  } else {
    throw FormatError("unknown algo '" + a.algo + "'");
  }
  write_file(dir / "training_log.json", rl::training_log_json(log) + "\n");
  const int best = eval::select_best_checkpoint(log);
  fmt::print("best epoch {} -> {}\n", best, (ckpt_dir / (rl::checkpoint_stem(best) + ".json")).string());
  fmt::print("run directory: {}\n", dir.string());
  return 0;
}

struct EvalArgs {
  std::vector<std::string> policy;
  std::string kind = "base";
  std::string model;
  std::optional<double> temperature;
  std::string scripted = "zero";
  double rate = 0;
  std::string config;
  std::string out = "runs";
  int workers = -1;
};

int cmd_eval(const EvalArgs& a) {
  eval::RunConfig cfg = config_from(a.config);
  if (a.workers >= 0) cfg.protocol.workers = a.workers;
  if (a.policy.empty()) throw FormatError("--policy is required");
  const std::string& which = a.policy.front();

  std::string fingerprint = eval::run_config_json(cfg);
  for (const auto& p : a.policy) fingerprint += "|" + p;
  fingerprint += fmt::format("|{}|{}|{}|{}|{}", a.kind, a.model, a.temperature.value_or(-1), a.scripted, a.rate);
  const fs::path dir = make_run_dir(a.out, "eval-" + which, fingerprint);

  eval::PolicySpec spec;
  if (which == "checkpoint") {
    if (a.policy.size() != 2) throw FormatError("--policy checkpoint needs a PATH");
    spec = eval::CheckpointPolicySpec{resolve_checkpoint(a.policy[1])};
  } else if (which == "llm") {
    eval::LlmPolicySpec l;
    l.kind = llm::parse_prompt_kind(a.kind);
    l.config = cfg.llm;
    if (!a.model.empty()) l.config.model_name = a.model;
    if (a.temperature) l.config.temperature = *a.temperature;
    l.audit_log = dir / "audit.jsonl";
    spec = l;
  } else if (which == "scripted") {
    spec = eval::ScriptedPolicySpec{eval::parse_scripted_kind(a.scripted), a.rate};
  } else {
    throw FormatError("unknown policy type '" + which + "' (checkpoint | llm | scripted)");
  }

  const auto policy = eval::resolve_policy(spec);
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = eval::run_protocol(*policy, cfg.protocol);
  const auto report = eval::aggregate(records, cfg.protocol, policy->identity());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  eval::emit_report(report, dir / "report.json", eval::ReportFormat::Json);
  eval::emit_report(report, dir / "report.csv", eval::ReportFormat::Csv);
  write_file(dir / "episodes.jsonl", eval::records_jsonl(records));
  write_file(dir / "protocol.json", cfg.protocol.canonical_json() + "\n");

  fmt::print("policy {}  ({} episodes, {:.1f} s)\n", report.policy, records.size(), secs);
  auto print_row = [](const eval::StratumMetrics& m) {
    fmt::print("  {:<11} return {:6.2f} [{:6.2f}, {:6.2f}]  tir {:.3f}  survival {:.3f}  dose {:.3f}{}\n", m.name,
               m.normalized_return.mean, m.normalized_return.ci_low, m.normalized_return.ci_high, m.tir.mean,
               m.survival.mean, m.mean_dosage.mean, m.complete ? "" : "  (incomplete)");
  };
  for (const auto& m : report.strata) print_row(m);
  print_row(report.overall);
  fmt::print("run directory: {}\n", dir.string());
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& csv) {
  std::vector<eval::MetricsReport> reports;
  for (const auto& p : paths) reports.push_back(eval::load_report(fs::is_directory(p) ? fs::path(p) / "report.json" : fs::path(p)));
  const auto cmp = eval::compare_policies(reports);
  std::cout << eval::comparison_table(cmp);
  if (!csv.empty()) write_file(csv, eval::comparison_csv(cmp));
  return 0;
}

llm::MockLlmServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_mock(const std::string& script, int port, const std::string& host) {
  llm::MockLlmServer server(llm::parse_mock_script(read_file(script)), host, port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  fmt::print("mock chat-completions server at {}\n", server.base_url());
  std::fflush(stdout);
  server.wait();
  fmt::print("served {} requests\n", server.request_count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Insulin-dosing policy benchmark"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a DQN or PPO agent, one checkpoint per epoch");
  train->add_option("--algo", ta.algo)->check(CLI::IsMember({"dqn", "ppo"}));
  train->add_option("--env", ta.env)->check(CLI::IsMember({"adult", "adolescent", "child", "mixed"}));
  train->add_option("--prior", ta.prior)->check(CLI::IsMember({"on", "off"}));
  train->add_option("--seed", ta.seed);
  train->add_option("--config", ta.config, "YAML run config")->check(CLI::ExistingFile);
  train->add_option("--out", ta.out, "root for run directories");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "run the 240-episode protocol and write reports");
  ev->add_option("--policy", ea.policy, "checkpoint PATH | llm | scripted")->expected(1, 2)->required();
  ev->add_option("--kind", ea.kind, "LLM prompt kind")->check(CLI::IsMember({"base", "prior", "cot", "meal-cot"}));
  ev->add_option("--model", ea.model);
  ev->add_option("--temperature", ea.temperature);
  ev->add_option("--scripted", ea.scripted)->check(CLI::IsMember({"zero", "max", "constant", "random012"}));
  ev->add_option("--rate", ea.rate, "rate for --scripted constant");
  ev->add_option("--config", ea.config)->check(CLI::ExistingFile);
  ev->add_option("--out", ea.out);
  ev->add_option("--workers", ea.workers);

  std::vector<std::string> reports;
  std::string csv;
  auto* cmp = app.add_subcommand("compare", "side-by-side table of reports from one protocol");
  cmp->add_option("reports", reports, "report.json files or eval run directories")->required()->expected(2, -1);
  cmp->add_option("--csv", csv);

  std::string script, host = "127.0.0.1";
  int port = 8000;
  auto* mock = app.add_subcommand("mock-llm", "serve scripted chat-completions replies");
  mock->add_option("--script", script)->required()->check(CLI::ExistingFile);
  mock->add_option("--port", port);
  mock->add_option("--host", host);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(ta);
    if (*ev) return cmd_eval(ea);
    if (*cmp) return cmd_compare(reports, csv);
    if (*mock) return cmd_mock(script, port, host);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
