#include "dtrbench/eval/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dtrbench/errors.hpp"
#include "json.hpp"

namespace dtrbench::eval {

using nlohmann::ordered_json;

namespace {

ordered_json summary_json(const risk::MetricSummary& m) {
  return {{"mean", m.mean}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}, {"n", m.n}};
}

risk::MetricSummary summary_from(const ordered_json& j) {
  return {j.at("mean").get<double>(), j.at("ci_low").get<double>(), j.at("ci_high").get<double>(),
          j.at("n").get<std::size_t>()};
}

ordered_json stratum_json(const StratumMetrics& s) {
  return {{"name", s.name},
          {"episodes", s.episodes},
          {"failed", s.failed},
          {"complete", s.complete},
          {"normalized_return", summary_json(s.normalized_return)},
          {"tir", summary_json(s.tir)},
          {"survival", summary_json(s.survival)},
          {"mean_dosage", summary_json(s.mean_dosage)}};
}

StratumMetrics stratum_from(const ordered_json& j) {
  StratumMetrics s;
  s.name = j.at("name").get<std::string>();
  s.episodes = j.at("episodes").get<std::size_t>();
  s.failed = j.at("failed").get<std::size_t>();
  s.complete = j.at("complete").get<bool>();
  s.normalized_return = summary_from(j.at("normalized_return"));
  s.tir = summary_from(j.at("tir"));
  s.survival = summary_from(j.at("survival"));
  s.mean_dosage = summary_from(j.at("mean_dosage"));
  return s;
}

std::string csv_row(const MetricsReport& r, const StratumMetrics& s) {
  std::string row = fmt::format("\"{}\",{},{},{},{},{}", r.policy, r.protocol_hash, s.name, s.episodes,
                                s.failed, s.complete ? 1 : 0);
  for (const auto* m : {&s.normalized_return, &s.tir, &s.survival, &s.mean_dosage})
    row += fmt::format(",{},{},{}", m->mean, m->ci_low, m->ci_high);
  return row + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

bool overlaps(const risk::MetricSummary& a, const risk::MetricSummary& b) {
  return !(a.ci_high < b.ci_low || b.ci_high < a.ci_low);
}

}  // namespace

std::string report_json(const MetricsReport& r) {
  ordered_json j;
  j["policy"] = r.policy;
  j["protocol_hash"] = r.protocol_hash;
  ordered_json strata = ordered_json::array();
  for (const auto& s : r.strata) strata.push_back(stratum_json(s));
  j["strata"] = strata;
  j["overall"] = stratum_json(r.overall);
  return j.dump(2) + "\n";
}

MetricsReport parse_report_json(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    MetricsReport r;
    r.policy = j.at("policy").get<std::string>();
    r.protocol_hash = j.at("protocol_hash").get<std::string>();
    for (const auto& s : j.at("strata")) r.strata.push_back(stratum_from(s));
    r.overall = stratum_from(j.at("overall"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
}

std::string report_csv(const MetricsReport& r) {
  std::string out =
      "policy,protocol_hash,stratum,episodes,failed,complete,"
      "return_mean,return_ci_low,return_ci_high,tir_mean,tir_ci_low,tir_ci_high,"
      "survival_mean,survival_ci_low,survival_ci_high,dosage_mean,dosage_ci_low,dosage_ci_high\n";
  for (const auto& s : r.strata) out += csv_row(r, s);
  out += csv_row(r, r.overall);
  return out;
}

void emit_report(const MetricsReport& report, const std::filesystem::path& path, ReportFormat format) {
  write_file(path, format == ReportFormat::Json ? report_json(report) : report_csv(report));
}

MetricsReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report_json(ss.str());
}

std::string records_jsonl(const std::vector<EpisodeRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json steps = ordered_json::array();
    for (const auto& s : r.steps) steps.push_back({s.bg, s.action, s.reward});
    ordered_json j = {{"scenario", r.scenario_id},
                      {"seed", r.seed},
                      {"repeat", r.repeat},
                      {"termination", to_string(r.termination)},
                      {"return", r.episode_return},
                      {"normalized_return", r.normalized_return},
                      {"tir", r.tir},
                      {"survived", r.survived},
                      {"mean_dosage", r.mean_dosage},
                      {"fallback_actions", r.fallback_actions},
                      {"failed", r.failed},
                      {"error", r.error},
                      {"steps", steps}};
    out += j.dump() + "\n";
  }
  return out;
}

Comparison compare_policies(const std::vector<MetricsReport>& reports) {
  require(reports.size() >= 2, "comparison needs at least two reports");
  for (const auto& r : reports) {
    if (r.protocol_hash != reports.front().protocol_hash) {
      throw ContractViolation(fmt::format("protocol mismatch: '{}' has {}, '{}' has {}", reports.front().policy,
                                          reports.front().protocol_hash, r.policy, r.protocol_hash));
    }
  }
  std::vector<std::size_t> cols(reports.size());
  std::iota(cols.begin(), cols.end(), 0);
  std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
    return reports[a].overall.normalized_return.mean > reports[b].overall.normalized_return.mean;
  });

  Comparison c;
  for (auto i : cols) c.policies.push_back(reports[i].policy);
  for (const auto& s : reports[cols.front()].strata) c.strata.push_back(s.name);
  c.strata.push_back("overall");

  auto find = [](const MetricsReport& r, const std::string& name) -> const StratumMetrics& {
    if (name == "overall") return r.overall;
    for (const auto& s : r.strata)
      if (s.name == name) return s;
    throw ContractViolation("report '" + r.policy + "' lacks stratum " + name);
  };
  for (const auto& name : c.strata) {
    const auto& first = find(reports[cols.front()], name).normalized_return;
    std::vector<ComparisonCell> row;
    for (auto i : cols) {
      const auto& m = find(reports[i], name).normalized_return;
      row.push_back({m, m.mean - first.mean, overlaps(m, first)});
    }
    c.cells.push_back(std::move(row));
  }
  return c;
}

std::string comparison_table(const Comparison& c) {
  std::size_t w = 12;
  for (const auto& s : c.strata) w = std::max(w, s.size() + 2);
  std::string out = fmt::format("{:<{}}", "stratum", w);
  for (const auto& p : c.policies) out += fmt::format(" | {:<34}", p);
  out += "\n";
  for (std::size_t r = 0; r < c.strata.size(); ++r) {
    out += fmt::format("{:<{}}", c.strata[r], w);
    for (const auto& cell : c.cells[r]) {
      const auto& m = cell.normalized_return;
      out += fmt::format(" | {:6.2f} [{:6.2f},{:6.2f}] {:+7.2f}{}", m.mean, m.ci_low, m.ci_high, cell.diff_vs_first,
                         cell.overlaps_first ? " " : "*");
    }
    out += "\n";
  }
  out += "(* = 95% CI does not overlap the first column)\n";
  return out;
}

std::string comparison_csv(const Comparison& c) {
  std::string out = "stratum,policy,return_mean,return_ci_low,return_ci_high,diff_vs_first,overlaps_first\n";
  for (std::size_t r = 0; r < c.strata.size(); ++r)
    for (std::size_t k = 0; k < c.policies.size(); ++k) {
      const auto& cell = c.cells[r][k];
      out += fmt::format("{},\"{}\",{},{},{},{},{}\n", c.strata[r], c.policies[k], cell.normalized_return.mean,
                         cell.normalized_return.ci_low, cell.normalized_return.ci_high, cell.diff_vs_first,
                         cell.overlaps_first ? 1 : 0);
    }
  return out;
}

}  // namespace dtrbench::eval
