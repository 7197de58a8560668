#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "souschef/result.hpp"

namespace souschef::llm {

enum class Role { System, User, Assistant };
const char* to_string(Role r);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  // Path or scene identifier for multimodal requests; resolved by the
  // backend (mocks may match on it directly).
  std::optional<std::string> image_ref;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

struct ChatUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  std::string finish_reason = "stop";
  ChatUsage usage;
};

struct GatewayError {
  enum class Code { Timeout, Http, MalformedResponse, MissingImage, Config };
  Code code;
  int status = 0;  // HTTP status for Code::Http (0 when transport-level)
  std::string message;
};

const char* to_string(GatewayError::Code c);

// First matching rule wins; all present fields of a rule must match.
struct MockRule {
  std::vector<std::string> contains;    // every substring must appear in the last user message
  std::optional<std::string> pattern;   // ECMAScript regex, searched
  std::optional<std::string> scene;     // must equal the request's image_ref
  std::string response;
};

struct MockScenario {
  std::vector<MockRule> rules;
  std::string default_response = "no scripted response";
};

Result<MockScenario, DocError> parse_scenario(const std::string& json_text);
Result<MockScenario, DocError> load_scenario(const std::filesystem::path& path);

struct RetryPolicy {
  int count = 0;       // retries after the first attempt
  int backoff_ms = 0;  // multiplied by the attempt number
};

struct BackendConfig {
  enum class Kind { Remote, Mock };
  Kind kind = Kind::Mock;
  // Remote fields (OpenAI-compatible endpoints).
  std::string base_url;
  std::string model;
  std::string auth_env;  // environment variable holding the bearer token
  int timeout_ms = 30000;
  RetryPolicy retry;
  // Mock fields.
  MockScenario scenario;
};

struct TranscriptEntry {
  std::string stage;    // planner / codegen / vision / embedding
  std::string backend;  // mock / remote
  std::string request_tail;
  bool ok = true;
  std::string response_or_error;
};

// Append-only request/response log shared by one session. Appends are
// serialized; reads copy.
class Transcript {
 public:
  Transcript() = default;
  Transcript(const Transcript& o) : entries_(o.snapshot()) {}
  Transcript& operator=(const Transcript& o) {
    if (this != &o) {
      std::scoped_lock lock(mutex_);
      entries_ = o.snapshot();
    }
    return *this;
  }

  void append(TranscriptEntry entry) {
    std::scoped_lock lock(mutex_);
    entries_.push_back(std::move(entry));
  }
  std::vector<TranscriptEntry> snapshot() const {
    std::scoped_lock lock(mutex_);
    return entries_;
  }
  std::size_t count_stage(const std::string& stage) const {
    std::scoped_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& e : entries_)
      if (e.stage == stage) ++n;
    return n;
  }

 private:
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
};

// Chat-completion client over a remote OpenAI-compatible endpoint or a
// deterministic mock scenario. Every invocation appends exactly one
// transcript entry when a transcript is supplied, including failures.
class ChatClient {
 public:
  explicit ChatClient(BackendConfig config) : config_(std::move(config)) {}

  Result<ChatResponse, GatewayError> chat(const ChatRequest& request,
                                          Transcript* transcript = nullptr,
                                          const std::string& stage = "chat") const;
  // Like chat, but the last user message must carry an image reference.
  Result<ChatResponse, GatewayError> chat_with_image(const ChatRequest& request,
                                                     Transcript* transcript = nullptr,
                                                     const std::string& stage = "vision") const;

  const BackendConfig& config() const { return config_; }

 private:
  Result<ChatResponse, GatewayError> dispatch(const ChatRequest& request, bool needs_image,
                                              Transcript* transcript,
                                              const std::string& stage) const;
  Result<ChatResponse, GatewayError> remote_chat(const ChatRequest& request) const;
  ChatResponse mock_chat(const ChatRequest& request) const;

  BackendConfig config_;
};

inline constexpr std::size_t kFallbackEmbeddingDim = 256;

// Embedding client: remote endpoint, or the deterministic hashed
// bag-of-tokens fallback (mock). Vectors are L2-normalized.
class Embedder {
 public:
  explicit Embedder(BackendConfig config) : config_(std::move(config)) {}

  Result<std::vector<std::vector<double>>, GatewayError> embed(
      const std::vector<std::string>& texts, Transcript* transcript = nullptr,
      const std::string& stage = "embedding") const;

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
};

// Deterministic fallback embedding of one text (exposed for tests).
std::vector<double> hashed_embedding(const std::string& text);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace souschef::llm
