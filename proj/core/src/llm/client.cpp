#include "dtrbench/llm/client.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace dtrbench::llm {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

json messages_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

}  // namespace

void LlmConfig::validate() const {
  require(temperature >= 0.0 && std::isfinite(temperature), "temperature must be non-negative");
  require(max_retries >= 0, "max_retries must be non-negative");
  require(fallback_dose >= 0.0 && fallback_dose <= sim::kMaxRate, "fallback dose must be in [0, 9]");
  require(request_timeout > 0.0, "request timeout must be positive");
  require(max_in_flight >= 1, "max_in_flight must be at least 1");
  if (max_tokens) require(*max_tokens >= 1, "max_tokens must be positive");
}

int LlmConfig::max_tokens_for(PromptKind kind) const {
  if (max_tokens) return *max_tokens;
  return is_cot(kind) ? 1024 : 16;
}

LlmConfig LlmConfig::with_environment() const {
  LlmConfig c = *this;
  if (c.base_url.empty()) c.base_url = env_or("OPENAI_BASE_URL", "");
  if (c.api_key.empty()) c.api_key = env_or("OPENAI_API_KEY", "");
  return c;
}

std::string_view to_string(ActStatus s) {
  switch (s) {
    case ActStatus::Ok: return "ok";
    case ActStatus::Clamped: return "clamped";
    case ActStatus::FallbackUsed: return "fallback";
  }
  return "fallback";
}

std::string chat_request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                              int max_tokens) {
  json body;
  body["model"] = config.model_name;
  body["messages"] = messages_json(messages);
  body["temperature"] = config.temperature;
  body["max_tokens"] = max_tokens;
  return body.dump();
}

std::string chat_reply_content(const std::string& body) {
  try {
    const json j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed chat reply: ") + e.what());
  }
}

// --- audit ---------------------------------------------------------------------------------

AuditLog::AuditLog(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw IoError("cannot open audit log " + path);
}

std::string audit_record_json(const AuditLog::Context& ctx, const LlmAction& act) {
  json rec;
  rec["episode"] = ctx.episode;
  rec["step"] = ctx.step;
  rec["kind"] = std::string(to_string(ctx.kind));
  rec["fallback_dose"] = ctx.fallback_dose;
  rec["action"] = act.action;
  rec["status"] = std::string(to_string(act.status));
  rec["messages"] = act.exchanges.empty() ? json::array() : messages_json(act.exchanges.front().messages);
  json attempts = json::array();
  for (const auto& ex : act.exchanges) {
    json a;
    a["raw_response"] = ex.raw_response;
    a["parsed_dose"] = ex.parsed_dose ? json(*ex.parsed_dose) : json(nullptr);
    a["parse_status"] = std::string(to_string(ex.parse_status));
    a["error"] = ex.error;
    attempts.push_back(std::move(a));
  }
  rec["attempts"] = std::move(attempts);
  return rec.dump();
}

void AuditLog::append(const Context& ctx, const LlmAction& act) {
  const std::string line = audit_record_json(ctx, act);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
}

std::vector<double> replay_audit_log(const std::string& text) {
  std::vector<double> actions;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const PromptKind kind = parse_prompt_kind(rec.at("kind").get<std::string>());
      double action = rec.at("fallback_dose").get<double>();
      for (const auto& a : rec.at("attempts")) {
        if (!a.at("error").get<std::string>().empty()) continue;
        const ParseResult r = parse_reply(kind, a.at("raw_response").get<std::string>());
        if (r.dose) {
          action = *r.dose;
          break;
        }
      }
      actions.push_back(action);
    } catch (const json::exception& e) {
      throw FormatError(std::string("audit log: ") + e.what());
    }
  }
  return actions;
}

// --- client --------------------------------------------------------------------------------

struct LlmClient::Limiter {
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
  int cap = 1;

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return in_flight < cap; });
    ++in_flight;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      --in_flight;
    }
    cv.notify_one();
  }
};

LlmClient::LlmClient(LlmConfig config)
    : config_(config.with_environment()), limiter_(std::make_unique<Limiter>()) {
  config_.validate();
  if (config_.base_url.empty())
    throw ContractViolation("no LLM base URL configured (set base_url or OPENAI_BASE_URL)");
  const std::string& url = config_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FormatError("LLM base URL needs a scheme: " + url);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  limiter_->cap = config_.max_in_flight;
}

LlmClient::~LlmClient() = default;

std::string LlmClient::complete(const std::vector<ChatMessage>& messages, int max_tokens) const {
  limiter_->acquire();
  struct Release {
    Limiter* l;
    ~Release() { l->release(); }
  } release{limiter_.get()};

  httplib::Client cli(scheme_host_port_);
  if (!cli.is_valid()) throw TransportError("unsupported LLM base URL " + config_.base_url);
  const auto timeout = std::chrono::milliseconds(static_cast<long>(config_.request_timeout * 1000.0));
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = cli.Post(path_prefix_ + "/chat/completions", headers,
                            chat_request_body(config_, messages, max_tokens), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  return chat_reply_content(res->body);
}

LlmAction LlmClient::act(const sim::EpisodeHistory& history, PromptKind kind) const {
  const auto messages =
      build_prompt(kind, serialize_observation(history, kind == PromptKind::PriorMealCot));
  const int max_tokens = config_.max_tokens_for(kind);
  LlmAction out;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    ChatExchange ex;
    ex.messages = messages;
    try {
      ex.raw_response = complete(messages, max_tokens);
      const ParseResult r = parse_reply(kind, ex.raw_response);
      ex.parsed_dose = r.dose;
      ex.parse_status = r.status;
    } catch (const TransportError& e) {
      ex.error = e.what();
    }
    const bool parsed = ex.parsed_dose.has_value();
    out.exchanges.push_back(std::move(ex));
    if (parsed) {
      out.action = *out.exchanges.back().parsed_dose;
      out.status = out.exchanges.back().parse_status == ParseStatus::Clamped ? ActStatus::Clamped
                                                                             : ActStatus::Ok;
      return out;
    }
  }
  out.action = config_.fallback_dose;
  out.status = ActStatus::FallbackUsed;
  return out;
}

}  // namespace dtrbench::llm
