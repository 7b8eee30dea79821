#include <doctest.h>

#include <future>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "seqqa/service.hpp"
#include "support.hpp"

using namespace seqqa;
using json = nlohmann::json;

namespace {

std::shared_ptr<const Checkpoint> trained_like_model() {
  const auto vocab = test::small_vocab();
  return std::make_shared<const Checkpoint>(
      Checkpoint{test::random_params<float>(Hyper{vocab.size(), 6, 6, 2}, 17, 1.0), vocab});
}

class RunningServer {
 public:
  RunningServer(std::shared_ptr<const Checkpoint> model, ServiceOptions options = {})
      : server_(std::move(model), std::move(options)) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
    server_.wait_until_ready();
  }
  ~RunningServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  InferenceServer server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("handle_ask contract") {
  const auto model = trained_like_model();
  const auto ok = handle_ask(*model, {}, R"({"question":"Hi"})");
  CHECK(ok.status == 200);
  const auto body = json::parse(ok.body);
  CHECK(body["answer"].is_string());
  CHECK(body["tokens"].is_array());
  CHECK(body["terminated"].is_boolean());
  CHECK(body["latency_ms"].get<double>() >= 0.0);

  CHECK(handle_ask(*model, {}, "{").status == 400);
  CHECK(json::parse(handle_ask(*model, {}, "{").body).contains("error"));
  CHECK(handle_ask(*model, {}, R"({"q":"Hi"})").status == 400);
  CHECK(handle_ask(*model, {}, R"({"question":3})").status == 400);
  CHECK(handle_ask(*model, {}, R"(["Hi"])").status == 400);
  const auto empty = handle_ask(*model, {}, R"({"question":"   "})");
  CHECK(empty.status == 422);
  CHECK(json::parse(empty.body)["error"].is_string());
}

TEST_CASE("handle_health reports the model shape") {
  const auto model = trained_like_model();
  const auto reply = handle_health(*model);
  CHECK(reply.status == 200);
  const auto body = json::parse(reply.body);
  CHECK(body["status"] == "ok");
  CHECK(body["layers"] == 2);
  CHECK(body["hidden"] == 6);
  CHECK(body["vocab_size"] == model->vocab.size());
}

TEST_CASE("address parsing") {
  CHECK(parse_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_address("localhost:0").second == 0);
  CHECK_THROWS_AS(parse_address("localhost"), InputError);
  CHECK_THROWS_AS(parse_address(":80"), InputError);
  CHECK_THROWS_AS(parse_address("host:80x"), InputError);
  CHECK_THROWS_AS(parse_address("host:70000"), InputError);
}

TEST_CASE("concurrent identical questions over HTTP give identical answers") {
  const auto model = trained_like_model();
  const auto checksum = params_checksum(model->params);
  RunningServer server(model);

  std::vector<std::future<std::pair<int, std::string>>> replies;
  for (int k = 0; k < 10; ++k) {
    replies.push_back(std::async(std::launch::async, [&] {
      httplib::Client client("127.0.0.1", server.port());
      const auto res = client.Post("/ask", R"({"question":"hi there"})", "application/json");
      if (!res) return std::pair<int, std::string>{-1, ""};
      return std::pair<int, std::string>{res->status, json::parse(res->body)["answer"].get<std::string>()};
    }));
  }
  std::set<std::string> answers;
  for (auto& f : replies) {
    const auto [status, text] = f.get();
    CHECK(status == 200);
    answers.insert(text);
  }
  CHECK(answers.size() == 1);
  CHECK(params_checksum(model->params) == checksum);

  httplib::Client client("127.0.0.1", server.port());
  const auto bad = client.Post("/ask", "{", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto empty = client.Post("/ask", R"({"question":""})", "application/json");
  REQUIRE(empty);
  CHECK(empty->status == 422);
  const auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");
  const auto missing = client.Get("/nowhere");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body).contains("error"));
}

TEST_CASE("CORS headers when an origin is allowed") {
  ServiceOptions options;
  options.allow_origin = "http://localhost:5173";
  RunningServer server(trained_like_model(), options);
  httplib::Client client("127.0.0.1", server.port());
  const auto pre = client.Options("/ask");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  const auto res = client.Post("/ask", R"({"question":"hi"})", "application/json");
  REQUIRE(res);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
}
