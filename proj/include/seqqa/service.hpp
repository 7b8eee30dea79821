#pragma once

#include <memory>
#include <string>

#include "seqqa/checkpoint.hpp"
#include "seqqa/inference.hpp"

namespace httplib {
class Server;
}

namespace seqqa {

struct HttpReply {
  int status = 200;
  std::string body;  // always JSON
};

/// POST /ask: {"question": str} -> {answer, tokens, terminated, latency_ms}.
/// Malformed JSON or a missing/non-string question gives 400, an empty
/// question 422.
HttpReply handle_ask(const Checkpoint& model, const AnswerConfig& config, const std::string& body);

/// GET /health: {status, vocab_size, hidden, layers}.
HttpReply handle_health(const Checkpoint& model);

struct ServiceOptions {
  std::string allow_origin;  // empty: no CORS headers
  AnswerConfig answer;
};

/// Serves one read-only model. Requests run concurrently on the
/// server's thread pool against the shared checkpoint.
class InferenceServer {
 public:
  InferenceServer(std::shared_ptr<const Checkpoint> model, ServiceOptions options);
  ~InferenceServer();
  InferenceServer(const InferenceServer&) = delete;
  InferenceServer& operator=(const InferenceServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  bool running() const;
  void wait_until_ready() const;

 private:
  std::shared_ptr<const Checkpoint> model_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

/// Splits "HOST:PORT"; throws InputError when malformed.
std::pair<std::string, int> parse_address(const std::string& addr);

}  // namespace seqqa
