#include <atomic>
#include <cmath>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "souschef/llm_client.hpp"

using namespace souschef;
using namespace souschef::llm;

namespace {

ChatRequest user_message(const std::string& content,
                         std::optional<std::string> image = std::nullopt) {
  ChatRequest request;
  request.model = "test-model";
  ChatMessage msg;
  msg.role = Role::User;
  msg.content = content;
  msg.image_ref = std::move(image);
  request.messages.push_back(std::move(msg));
  return request;
}

BackendConfig mock_backend(MockScenario scenario) {
  BackendConfig config;
  config.kind = BackendConfig::Kind::Mock;
  config.scenario = std::move(scenario);
  return config;
}

// Local OpenAI-compatible endpoint for the remote-path tests.
class LocalServer {
 public:
  explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions",
                 [this, handler](const httplib::Request& req, httplib::Response& res) {
                   ++hits_;
                   handler(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  int hits() const { return hits_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

BackendConfig remote_backend(int port, int retries = 0) {
  BackendConfig config;
  config.kind = BackendConfig::Kind::Remote;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.model = "test-model";
  config.retry.count = retries;
  config.timeout_ms = 5000;
  return config;
}

}  // namespace

TEST_CASE("mock chat: first matching rule wins, default otherwise") {
  MockScenario scenario;
  scenario.rules.push_back({{"fruit salad"}, std::nullopt, std::nullopt, "canned plan"});
  scenario.rules.push_back({{"salad"}, std::nullopt, std::nullopt, "generic"});
  scenario.default_response = "fallback";
  const ChatClient client(mock_backend(scenario));

  CHECK(client.chat(user_message("please make a fruit salad"))->content == "canned plan");
  CHECK(client.chat(user_message("a potato salad"))->content == "generic");
  CHECK(client.chat(user_message("roast beef"))->content == "fallback");
}

TEST_CASE("mock chat: conjunction of substrings and regex patterns") {
  MockScenario scenario;
  scenario.rules.push_back({{"Translate", "cucumber"}, std::nullopt, std::nullopt, "veg code"});
  scenario.rules.push_back({{}, std::string("to[s]+ the bowl"), std::nullopt, "toss hint"});
  const ChatClient client(mock_backend(scenario));

  CHECK(client.chat(user_message("Translate the plan: cucumber"))->content == "veg code");
  CHECK(client.chat(user_message("cucumber only"))->content != "veg code");
  CHECK(client.chat(user_message("please toss the bowl"))->content == "toss hint");
}

TEST_CASE("mock chat is deterministic and matches on the last user message") {
  MockScenario scenario;
  scenario.rules.push_back({{"second"}, std::nullopt, std::nullopt, "hit"});
  const ChatClient client(mock_backend(scenario));
  ChatRequest request = user_message("first");
  request.messages.push_back({Role::Assistant, "second", std::nullopt});  // not a user message
  CHECK(client.chat(request)->content != "hit");
  request.messages.push_back({Role::User, "second", std::nullopt});
  const auto a = client.chat(request);
  const auto b = client.chat(request);
  CHECK(a->content == "hit");
  CHECK(a->content == b->content);
}

TEST_CASE("chat_with_image: scene matcher and MissingImage") {
  MockScenario scenario;
  scenario.rules.push_back({{}, std::nullopt, std::string("veg-ok"), "canned detection"});
  const ChatClient client(mock_backend(scenario));

  const auto hit = client.chat_with_image(user_message("what do you see", "veg-ok"));
  REQUIRE(hit.ok());
  CHECK(hit->content == "canned detection");

  Transcript transcript;
  const auto missing = client.chat_with_image(user_message("what do you see"), &transcript);
  REQUIRE(!missing.ok());
  CHECK(missing.error().code == GatewayError::Code::MissingImage);
  CHECK(transcript.snapshot().size() == 1);  // failures are recorded too
  CHECK(!transcript.snapshot()[0].ok);
}

TEST_CASE("every invocation appends exactly one transcript entry") {
  MockScenario scenario;
  scenario.default_response = "ok";
  const ChatClient client(mock_backend(scenario));
  const Embedder embedder(mock_backend({}));
  Transcript transcript;
  (void)client.chat(user_message("one"), &transcript, "planner");
  (void)client.chat(user_message("two"), &transcript, "codegen");
  (void)embedder.embed({"a", "b"}, &transcript);
  (void)embedder.embed({}, &transcript);  // config error, still recorded
  const auto entries = transcript.snapshot();
  REQUIRE(entries.size() == 4);
  CHECK(transcript.count_stage("planner") == 1);
  CHECK(transcript.count_stage("codegen") == 1);
  CHECK(transcript.count_stage("embedding") == 2);
  CHECK(!entries[3].ok);
}

TEST_CASE("remote chat: happy path forwards choices[0].message.content") {
  LocalServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    CHECK(body.at("model") == "test-model");
    CHECK(body.at("temperature").get<double>() == 0.0);
    res.set_content(nlohmann::json{{"choices",
                                    {{{"message", {{"content", "hello from server"}}},
                                      {"finish_reason", "stop"}}}},
                                   {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 3}}}}
                        .dump(),
                    "application/json");
  });
  const ChatClient client(remote_backend(server.port()));
  const auto response = client.chat(user_message("hi"));
  REQUIRE(response.ok());
  CHECK(response->content == "hello from server");
  CHECK(response->usage.prompt_tokens == 5);
}

TEST_CASE("remote chat: 500s are retried per policy, then surfaced") {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("{}", "application/json");
  });
  const ChatClient client(remote_backend(server.port(), 2));
  const auto response = client.chat(user_message("hi"));
  REQUIRE(!response.ok());
  CHECK(response.error().code == GatewayError::Code::Http);
  CHECK(response.error().status == 500);
  CHECK(server.hits() == 3);  // initial attempt + 2 retries
}

TEST_CASE("remote chat: non-transient statuses are not retried") {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("{}", "application/json");
  });
  const ChatClient client(remote_backend(server.port(), 3));
  const auto response = client.chat(user_message("hi"));
  REQUIRE(!response.ok());
  CHECK(response.error().status == 401);
  CHECK(server.hits() == 1);
}

TEST_CASE("remote chat: malformed bodies are MalformedResponse") {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"unexpected\": true}", "application/json");
  });
  const ChatClient client(remote_backend(server.port()));
  const auto response = client.chat(user_message("hi"));
  REQUIRE(!response.ok());
  CHECK(response.error().code == GatewayError::Code::MalformedResponse);
}

TEST_CASE("fallback embedder: deterministic unit vectors") {
  const Embedder embedder(mock_backend({}));
  const auto a = embedder.embed({"abc"});
  const auto b = embedder.embed({"abc"});
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a->front() == b->front());
  CHECK(a->front().size() == kFallbackEmbeddingDim);

  double norm = 0;
  for (double x : a->front()) norm += x * x;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
}

TEST_CASE("fallback embedder: token overlap orders cosine similarity") {
  const Embedder embedder(mock_backend({}));
  const auto vectors =
      embedder.embed({"fruit salad recipe", "fruit salad", "roast beef dinner"});
  REQUIRE(vectors.ok());
  const auto& query = (*vectors)[0];
  CHECK(cosine(query, (*vectors)[1]) > cosine(query, (*vectors)[2]));
}

TEST_CASE("cosine: symmetric, bounded, and 1 on identical inputs") {
  const Embedder embedder(mock_backend({}));
  const auto vectors = embedder.embed({"alpha beta gamma", "beta gamma delta"});
  REQUIRE(vectors.ok());
  const auto& a = (*vectors)[0];
  const auto& b = (*vectors)[1];
  CHECK(cosine(a, b) == doctest::Approx(cosine(b, a)).epsilon(1e-12));
  CHECK(cosine(a, b) >= -1.0);
  CHECK(cosine(a, b) <= 1.0);
  CHECK(std::abs(cosine(a, a) - 1.0) < 1e-9);
}

TEST_CASE("scenario documents parse strictly") {
  const auto good = parse_scenario(R"({
    "rules": [
      {"contains": "fruit", "response": "plan"},
      {"contains": ["a", "b"], "pattern": "x+", "scene": "s1", "response": "r"}
    ],
    "default": "dflt"
  })");
  REQUIRE(good.ok());
  CHECK(good->rules.size() == 2);
  CHECK(good->rules[1].contains.size() == 2);
  CHECK(good->default_response == "dflt");

  CHECK(!parse_scenario("[]").ok());
  CHECK(!parse_scenario(R"({"rules": [{"response": 5}]})").ok());
  CHECK(!parse_scenario(R"({"rules": [{"respond": "typo"}]})").ok());
  CHECK(!parse_scenario(R"({"rules": [{"pattern": "(", "response": "r"}]})").ok());
}
