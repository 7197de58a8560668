#include "souschef/llm_client.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "souschef/rng.hpp"

namespace souschef::llm {

namespace {

using nlohmann::json;

GatewayError gateway_error(GatewayError::Code code, std::string message, int status = 0) {
  return {code, status, std::move(message)};
}

const ChatMessage* last_user_message(const ChatRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
    if (it->role == Role::User) return &*it;
  return nullptr;
}

std::string tail(const std::string& s, std::size_t n = 160) {
  return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

// "http://host:port/prefix" -> (host part usable by httplib, path prefix)
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  const std::size_t authority_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_begin = base_url.find('/', authority_begin);
  if (path_begin == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_begin);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_begin), prefix};
}

json message_to_json(const ChatMessage& m) {
  json out{{"role", to_string(m.role)}};
  if (m.image_ref) {
    out["content"] = json::array({json{{"type", "text"}, {"text", m.content}},
                                  json{{"type", "image_url"},
                                       {"image_url", json{{"url", *m.image_ref}}}}});
  } else {
    out["content"] = m.content;
  }
  return out;
}

bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace

const char* to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "?";
}

const char* to_string(GatewayError::Code c) {
  switch (c) {
    case GatewayError::Code::Timeout: return "Timeout";
    case GatewayError::Code::Http: return "HttpError";
    case GatewayError::Code::MalformedResponse: return "MalformedResponse";
    case GatewayError::Code::MissingImage: return "MissingImage";
    case GatewayError::Code::Config: return "ConfigError";
  }
  return "?";
}

Result<MockScenario, DocError> parse_scenario(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return DocError{DocError::Code::Parse, "", "scenario document is not a JSON object"};
  MockScenario scenario;
  if (j.contains("default")) {
    if (!j.at("default").is_string())
      return DocError{DocError::Code::Parse, "default", "default response must be a string"};
    scenario.default_response = j.at("default").get<std::string>();
  }
  if (!j.contains("rules") || !j.at("rules").is_array())
    return DocError{DocError::Code::Parse, "rules", "scenario needs a rules array"};
  for (const auto& r : j.at("rules")) {
    if (!r.is_object())
      return DocError{DocError::Code::Parse, "rules", "rule is not a JSON object"};
    MockRule rule;
    for (auto it = r.begin(); it != r.end(); ++it) {
      const std::string& key = it.key();
      if (key != "contains" && key != "pattern" && key != "scene" && key != "response")
        return DocError{DocError::Code::Parse, key, "unknown rule field"};
    }
    if (r.contains("contains")) {
      const auto& c = r.at("contains");
      if (c.is_string()) {
        rule.contains.push_back(c.get<std::string>());
      } else if (c.is_array()) {
        for (const auto& s : c) {
          if (!s.is_string())
            return DocError{DocError::Code::Parse, "contains", "entries must be strings"};
          rule.contains.push_back(s.get<std::string>());
        }
      } else {
        return DocError{DocError::Code::Parse, "contains", "must be a string or string array"};
      }
    }
    if (r.contains("pattern")) {
      if (!r.at("pattern").is_string())
        return DocError{DocError::Code::Parse, "pattern", "must be a string"};
      rule.pattern = r.at("pattern").get<std::string>();
      try {
        std::regex probe(*rule.pattern);
      } catch (const std::regex_error& e) {
        return DocError{DocError::Code::Parse, "pattern", e.what()};
      }
    }
    if (r.contains("scene")) {
      if (!r.at("scene").is_string())
        return DocError{DocError::Code::Parse, "scene", "must be a string"};
      rule.scene = r.at("scene").get<std::string>();
    }
    if (!r.contains("response") || !r.at("response").is_string())
      return DocError{DocError::Code::Parse, "response", "rule needs a response string"};
    rule.response = r.at("response").get<std::string>();
    scenario.rules.push_back(std::move(rule));
  }
  return scenario;
}

Result<MockScenario, DocError> load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    return DocError{DocError::Code::Io, "", "cannot open scenario file: " + path.string()};
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ChatResponse ChatClient::mock_chat(const ChatRequest& request) const {
  const ChatMessage* user = last_user_message(request);
  const std::string content = user ? user->content : "";
  const std::string scene = user && user->image_ref ? *user->image_ref : "";

  const MockRule* hit = nullptr;
  for (const auto& rule : config_.scenario.rules) {
    bool match = true;
    for (const auto& needle : rule.contains)
      match = match && content.find(needle) != std::string::npos;
    if (match && rule.pattern) {
      const std::regex re(*rule.pattern);
      match = std::regex_search(content, re);
    }
    if (match && rule.scene) match = *rule.scene == scene;
    if (match) {
      hit = &rule;
      break;
    }
  }
  ChatResponse response;
  response.content = hit ? hit->response : config_.scenario.default_response;
  response.usage.prompt_tokens = static_cast<int>(content.size() / 4);
  response.usage.completion_tokens = static_cast<int>(response.content.size() / 4);
  return response;
}

Result<ChatResponse, GatewayError> ChatClient::remote_chat(const ChatRequest& request) const {
  if (config_.base_url.empty())
    return gateway_error(GatewayError::Code::Config, "remote backend needs a base URL");

  json body;
  body["model"] = request.model.empty() ? config_.model : request.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  body["messages"] = json::array();
  for (const auto& m : request.messages) body["messages"].push_back(message_to_json(m));

  const auto [host, prefix] = split_base_url(config_.base_url);
  httplib::Client client(host);
  client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
  client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    if (const char* token = std::getenv(config_.auth_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const int attempts = 1 + std::max(0, config_.retry.count);
  GatewayError last = gateway_error(GatewayError::Code::Http, "request not attempted");
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && config_.retry.backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry.backoff_ms * attempt));
    auto res = client.Post(prefix + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             err == httplib::Error::Read || err == httplib::Error::Write;
      last = gateway_error(timed_out ? GatewayError::Code::Timeout : GatewayError::Code::Http,
                           "transport failure: " + httplib::to_string(err));
      continue;  // transport failures are transient
    }
    if (res->status != 200) {
      last = gateway_error(GatewayError::Code::Http,
                           "endpoint returned status " + std::to_string(res->status),
                           res->status);
      if (transient_status(res->status)) continue;
      return last;
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
        !parsed["choices"][0]["message"].contains("content") ||
        !parsed["choices"][0]["message"]["content"].is_string())
      return gateway_error(GatewayError::Code::MalformedResponse,
                           "response body is not a chat completion: " + tail(res->body));
    ChatResponse response;
    response.content = parsed["choices"][0]["message"]["content"].get<std::string>();
    response.finish_reason = parsed["choices"][0].value("finish_reason", "stop");
    if (parsed.contains("usage") && parsed["usage"].is_object()) {
      response.usage.prompt_tokens = parsed["usage"].value("prompt_tokens", 0);
      response.usage.completion_tokens = parsed["usage"].value("completion_tokens", 0);
    }
    return response;
  }
  return last;
}

Result<ChatResponse, GatewayError> ChatClient::dispatch(const ChatRequest& request,
                                                        bool needs_image, Transcript* transcript,
                                                        const std::string& stage) const {
  const char* backend = config_.kind == BackendConfig::Kind::Mock ? "mock" : "remote";
  const ChatMessage* user = last_user_message(request);

  auto record = [&](bool ok, const std::string& detail) {
    if (transcript)
      transcript->append({stage, backend, user ? tail(user->content) : "", ok, detail});
  };

  if (request.messages.empty()) {
    const auto err = gateway_error(GatewayError::Code::Config, "request has no messages");
    record(false, err.message);
    return err;
  }
  if (needs_image && (!user || !user->image_ref || user->image_ref->empty())) {
    const auto err =
        gateway_error(GatewayError::Code::MissingImage, "request carries no image attachment");
    record(false, err.message);
    return err;
  }

  if (config_.kind == BackendConfig::Kind::Mock) {
    ChatResponse response = mock_chat(request);
    record(true, tail(response.content));
    return response;
  }
  auto response = remote_chat(request);
  if (response.ok())
    record(true, tail(response->content));
  else
    record(false, std::string(to_string(response.error().code)) + ": " +
                      response.error().message);
  return response;
}

Result<ChatResponse, GatewayError> ChatClient::chat(const ChatRequest& request,
                                                    Transcript* transcript,
                                                    const std::string& stage) const {
  return dispatch(request, false, transcript, stage);
}

Result<ChatResponse, GatewayError> ChatClient::chat_with_image(const ChatRequest& request,
                                                               Transcript* transcript,
                                                               const std::string& stage) const {
  return dispatch(request, true, transcript, stage);
}

namespace {

// Function words carry no retrieval signal but dominate the hashed mass of
// short documents, so they are dropped before hashing.
bool is_stopword(const std::string& token) {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",   "as",   "at",    "be",   "but",  "by",    "could",
      "for",  "from", "has",  "have",  "i",    "in",    "into", "is",   "it",    "its",
      "me",   "my",   "now",  "of",    "on",   "or",    "our",  "over", "please", "that",
      "the",  "their", "them", "then", "there", "these", "this", "to",   "until", "was",
      "we",   "what", "when", "where", "which", "while", "with", "would", "you",  "your"};
  return words.count(token) > 0;
}

}  // namespace

std::vector<double> hashed_embedding(const std::string& text) {
  std::vector<double> v(kFallbackEmbeddingDim, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (!is_stopword(token)) v[rng::fnv1a64(token) % kFallbackEmbeddingDim] += 1.0;
    token.clear();
  };
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u))
      token += static_cast<char>(std::tolower(u));
    else
      flush();
  }
  flush();

  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm == 0) {
    v[0] = 1.0;  // no tokens at all; fixed unit vector keeps the contract
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < n; ++i) dot += a[i] * b[i];
  for (double x : a) na += x * x;
  for (double x : b) nb += x * x;
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

Result<std::vector<std::vector<double>>, GatewayError> Embedder::embed(
    const std::vector<std::string>& texts, Transcript* transcript,
    const std::string& stage) const {
  const char* backend = config_.kind == BackendConfig::Kind::Mock ? "mock" : "remote";
  auto record = [&](bool ok, const std::string& detail) {
    if (transcript)
      transcript->append({stage, backend,
                          texts.empty() ? "" : tail(texts.front()), ok, detail});
  };

  if (texts.empty()) {
    const auto err = gateway_error(GatewayError::Code::Config, "embed requires at least one text");
    record(false, err.message);
    return err;
  }

  if (config_.kind == BackendConfig::Kind::Mock) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hashed_embedding(t));
    record(true, std::to_string(out.size()) + " vector(s)");
    return out;
  }

  json body;
  body["model"] = config_.model;
  body["input"] = texts;
  const auto [host, prefix] = split_base_url(config_.base_url);
  httplib::Client client(host);
  client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    if (const char* token = std::getenv(config_.auth_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const int attempts = 1 + std::max(0, config_.retry.count);
  GatewayError last = gateway_error(GatewayError::Code::Http, "request not attempted");
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && config_.retry.backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry.backoff_ms * attempt));
    auto res = client.Post(prefix + "/embeddings", headers, body.dump(), "application/json");
    if (!res) {
      last = gateway_error(GatewayError::Code::Timeout,
                           "transport failure: " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status != 200) {
      last = gateway_error(GatewayError::Code::Http,
                           "endpoint returned status " + std::to_string(res->status),
                           res->status);
      if (transient_status(res->status)) continue;
      record(false, last.message);
      return last;
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
        parsed["data"].size() != texts.size()) {
      const auto err = gateway_error(GatewayError::Code::MalformedResponse,
                                     "response is not an embedding list: " + tail(res->body));
      record(false, err.message);
      return err;
    }
    std::vector<std::vector<double>> out;
    for (const auto& item : parsed["data"]) {
      if (!item.contains("embedding") || !item["embedding"].is_array()) {
        const auto err = gateway_error(GatewayError::Code::MalformedResponse,
                                       "embedding entry missing vector");
        record(false, err.message);
        return err;
      }
      std::vector<double> v = item["embedding"].get<std::vector<double>>();
      double norm = 0;
      for (double x : v) norm += x * x;
      if (norm > 0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
      }
      out.push_back(std::move(v));
    }
    record(true, std::to_string(out.size()) + " vector(s)");
    return out;
  }
  record(false, last.message);
  return last;
}

}  // namespace souschef::llm
