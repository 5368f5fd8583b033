#pragma once

#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtrbench/errors.hpp"
#include "dtrbench/llm/parse.hpp"
#include "dtrbench/llm/prompts.hpp"
#include "dtrbench/sim/types.hpp"

namespace dtrbench::llm {

struct LlmConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1; empty means $OPENAI_BASE_URL
  std::string api_key;   // empty means $OPENAI_API_KEY (may stay empty)
  std::string model_name = "mock";
  double temperature = 0.7;
  std::optional<int> max_tokens;  // unset: 16 for zero-shot kinds, 1024 for CoT kinds
  double request_timeout = 60.0;  // seconds
  int max_retries = 2;
  double fallback_dose = 0.0;
  int max_in_flight = 4;

  void validate() const;
  int max_tokens_for(PromptKind kind) const;
  /// Fills base_url / api_key from the environment where unset.
  LlmConfig with_environment() const;
};

/// Transport-level failure: connection, timeout, non-200 status or malformed wire reply.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One request/response attempt.
struct ChatExchange {
  std::vector<ChatMessage> messages;
  std::string raw_response;
  std::optional<double> parsed_dose;
  ParseStatus parse_status = ParseStatus::Unparseable;
  std::string error;  // transport error text, empty when a reply arrived
};

enum class ActStatus { Ok, Clamped, FallbackUsed };
std::string_view to_string(ActStatus s);

struct LlmAction {
  double action = 0;
  ActStatus status = ActStatus::Ok;
  std::vector<ChatExchange> exchanges;  // every attempt, in order
};

/// JSON-lines audit sink shared by concurrent episodes.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path);

  struct Context {
    std::string episode;
    int step = 0;
    PromptKind kind = PromptKind::BaseZeroShot;
    double fallback_dose = 0;
  };
  void append(const Context& ctx, const LlmAction& act);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

std::string audit_record_json(const AuditLog::Context& ctx, const LlmAction& act);

/// Re-derives each record's action from the stored raw replies alone.
std::vector<double> replay_audit_log(const std::string& jsonl_text);

/// Chat-completions client. Thread-safe; concurrent requests are capped by max_in_flight.
class LlmClient {
 public:
  explicit LlmClient(LlmConfig config);
  ~LlmClient();

  /// One round trip. Throws TransportError.
  std::string complete(const std::vector<ChatMessage>& messages, int max_tokens) const;

  /// serialize -> build -> request -> parse -> clamp, with retries and fallback. Never throws
  /// for transport or parse failures.
  LlmAction act(const sim::EpisodeHistory& history, PromptKind kind) const;

  const LlmConfig& config() const { return config_; }

 private:
  struct Limiter;
  LlmConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::unique_ptr<Limiter> limiter_;
};

/// Request body for the chat-completions endpoint.
std::string chat_request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                              int max_tokens);
/// Assistant content of the first choice. Throws TransportError.
std::string chat_reply_content(const std::string& body);

}  // namespace dtrbench::llm
