#include "seqqa/service.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

#include "seqqa/errors.hpp"

namespace seqqa {

namespace {

using json = nlohmann::json;

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

}  // namespace

HttpReply handle_ask(const Checkpoint& model, const AnswerConfig& config, const std::string& body) {
  const auto start = std::chrono::steady_clock::now();
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!request.is_object() || !request.contains("question") || !request["question"].is_string()) {
    return error_reply(400, "request must be an object with a string field 'question'");
  }
  const auto question = request["question"].get<std::string>();
  if (tokenize(question).empty()) return error_reply(422, "question is empty");

  try {
    const auto result = answer(question, model.params, model.vocab, config);
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    json reply = {{"answer", result.answer_text},
                  {"tokens", result.answer_tokens},
                  {"terminated", result.terminated},
                  {"latency_ms", latency}};
    return {200, reply.dump()};
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
}

HttpReply handle_health(const Checkpoint& model) {
  json reply = {{"status", "ok"},
                {"vocab_size", model.params.hyper.vocab_size},
                {"hidden", model.params.hyper.hidden_size},
                {"layers", model.params.hyper.num_layers}};
  return {200, reply.dump()};
}

InferenceServer::InferenceServer(std::shared_ptr<const Checkpoint> model, ServiceOptions options)
    : model_(std::move(model)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  const auto send = [this](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  server_->set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
    if (!options_.allow_origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", options_.allow_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
  server_->Post("/ask", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_ask(*model_, options_.answer, req.body));
  });
  server_->Get("/health",
               [this, send](const httplib::Request&, httplib::Response& res) { send(res, handle_health(*model_)); });
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
    }
  });
  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", message}}.dump(), "application/json");
  });
}

InferenceServer::~InferenceServer() { stop(); }

int InferenceServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

bool InferenceServer::listen() { return server_->listen_after_bind(); }

void InferenceServer::stop() {
  if (server_) server_->stop();
}

bool InferenceServer::running() const { return server_->is_running(); }

void InferenceServer::wait_until_ready() const { server_->wait_until_ready(); }

std::pair<std::string, int> parse_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw InputError("address must be HOST:PORT, got '" + addr + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw InputError("bad port in address '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw InputError("port out of range in '" + addr + "'");
  return {addr.substr(0, colon), port};
}

}  // namespace seqqa
