#include "dtrbench/llm/mock_server.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "dtrbench/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace dtrbench::llm {

using nlohmann::json;

std::vector<MockReply> parse_mock_script(const std::string& text) {
  std::vector<MockReply> script;
  try {
    const json j = json::parse(text);
    if (!j.is_array()) throw FormatError("mock script must be a JSON array");
    for (const auto& e : j) {
      MockReply r;
      if (e.is_string()) {
        r.content = e.get<std::string>();
      } else if (e.is_object()) {
        r.content = e.value("content", std::string());
        r.delay_ms = e.value("delay_ms", 0);
        r.status = e.value("status", 200);
      } else {
        throw FormatError("mock script entries must be strings or objects");
      }
      script.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("mock script: ") + e.what());
  }
  if (script.empty()) throw FormatError("mock script is empty");
  return script;
}

namespace {

// Empty string when the request is acceptable, otherwise the reason.
std::string validate_request(const json& body) {
  if (!body.is_object()) return "body must be a JSON object";
  if (!body.contains("model") || !body["model"].is_string()) return "missing string field 'model'";
  if (!body.contains("messages") || !body["messages"].is_array() || body["messages"].empty())
    return "missing non-empty array 'messages'";
  for (const auto& m : body["messages"]) {
    if (!m.is_object() || !m.contains("role") || !m["role"].is_string() || !m.contains("content") ||
        !m["content"].is_string())
      return "each message needs string 'role' and 'content'";
  }
  if (body.contains("temperature") && !body["temperature"].is_number())
    return "'temperature' must be a number";
  return {};
}

json error_body(const std::string& msg) {
  return {{"error", {{"message", msg}, {"type", "invalid_request_error"}}}};
}

}  // namespace

struct MockLlmServer::Impl {
  std::vector<MockReply> script;
  std::string host;
  int port = 0;
  httplib::Server server;
  std::thread thread;
  mutable std::mutex mu;
  std::size_t served = 0;
  std::vector<std::string> payloads;

  void handle(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(error_body(std::string("invalid JSON: ") + e.what()).dump(), "application/json");
      return;
    }
    if (const std::string why = validate_request(body); !why.empty()) {
      res.status = 400;
      res.set_content(error_body(why).dump(), "application/json");
      return;
    }
    MockReply reply;
    std::size_t n = 0;
    {
      std::lock_guard lock(mu);
      n = served++;
      reply = script[n % script.size()];
      payloads.push_back(req.body);
    }
    if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
    res.status = reply.status;
    if (reply.status != 200) {
      res.set_content(error_body("scripted failure").dump(), "application/json");
      return;
    }
    const json out = {
        {"id", "mock-" + std::to_string(n)},
        {"object", "chat.completion"},
        {"model", body["model"]},
        {"choices",
         json::array({{{"index", 0},
                       {"message", {{"role", "assistant"}, {"content", reply.content}}},
                       {"finish_reason", "stop"}}})}};
    res.set_content(out.dump(), "application/json");
  }
};

MockLlmServer::MockLlmServer(std::vector<MockReply> script, std::string host, int port)
    : impl_(std::make_unique<Impl>()) {
  require(!script.empty(), "mock script must not be empty");
  impl_->script = std::move(script);
  impl_->host = std::move(host);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); };
  impl_->server.Post("/v1/chat/completions", handler);
  impl_->server.Post("/chat/completions", handler);
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->host);
  } else {
    impl_->port = impl_->server.bind_to_port(impl_->host, port) ? port : -1;
  }
  if (impl_->port <= 0) throw IoError("mock LLM server could not bind " + impl_->host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockLlmServer::~MockLlmServer() { stop(); }

int MockLlmServer::port() const { return impl_->port; }

std::string MockLlmServer::base_url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1";
}

std::size_t MockLlmServer::request_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->served;
}

std::vector<std::string> MockLlmServer::received_payloads() const {
  std::lock_guard lock(impl_->mu);
  return impl_->payloads;
}

void MockLlmServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockLlmServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace dtrbench::llm
