#pragma once

#include <memory>
#include <string>
#include <vector>

namespace dtrbench::llm {

struct MockReply {
  std::string content;
  int delay_ms = 0;
  int status = 200;
};

/// Script file: a JSON array whose entries are either a reply string or an object
/// {"content": ..., "delay_ms": ..., "status": ...}.
std::vector<MockReply> parse_mock_script(const std::string& json_text);

/// Local chat-completions server that answers from a fixed script, cycling when exhausted, and
/// records every well-formed request body. Malformed requests get a 400 and do not advance the
/// script.
class MockLlmServer {
 public:
  explicit MockLlmServer(std::vector<MockReply> script, std::string host = "127.0.0.1",
                         int port = 0);
  ~MockLlmServer();
  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  int port() const;
  std::string base_url() const;  // http://host:port/v1
  std::size_t request_count() const;
  std::vector<std::string> received_payloads() const;
  /// Blocks until stopped from another thread (used by the CLI).
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dtrbench::llm
