#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace tinytok::orch {

struct GenerationParams {
  int max_tokens = 1024;
  double temperature = 0.7;
};

enum class FailureKind { none, rate_limited, transient, permanent };

std::string to_string(FailureKind kind);

struct ProviderRequest {
  std::string id;
  std::string prompt;
  GenerationParams params;
};

struct ProviderResult {
  bool ok = false;
  std::string story;
  FailureKind failure = FailureKind::none;
  std::string message;

  static ProviderResult success(std::string story_text) {
    return {true, std::move(story_text), FailureKind::none, {}};
  }
  static ProviderResult fail(FailureKind kind, std::string message_text) {
    return {false, {}, kind, std::move(message_text)};
  }
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual ProviderResult complete(const ProviderRequest& request) = 0;
  virtual std::string describe() const = 0;
};

// Failure script for the mock: each request id fails its first
// `fail_attempts` calls with `kind`, then succeeds.
struct MockScript {
  struct Rule {
    int fail_attempts = 0;
    FailureKind kind = FailureKind::transient;
  };
  Rule default_rule;
  std::unordered_map<std::string, Rule> by_id;
  double latency_ms = 0.0;  // simulated per-call work
};

// Deterministic in-process provider: the story text is a pure function of
// the prompt, and failures follow the script.  Records per-call timestamps
// so tests can audit the request schedule.
class MockProvider : public CompletionProvider {
 public:
  explicit MockProvider(MockScript script = {});

  ProviderResult complete(const ProviderRequest& request) override;
  std::string describe() const override { return "mock"; }

  std::uint64_t call_count() const;
  // Monotonic milliseconds (from construction) of every complete() entry.
  std::vector<double> call_times_ms() const;

  static std::string story_for(const std::string& prompt);

 private:
  MockScript script_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, int> attempts_;
  std::vector<double> call_times_ms_;
  std::chrono::steady_clock::time_point start_;
};

// Configuration for a JSON-over-HTTP completion endpoint: the prompt is
// placed into `prompt_field` of a POST body, the story read from
// `response_field` of the reply.  Status classification: 429 -> rate
// limited, 408/5xx/transport errors -> transient, other 4xx -> permanent.
struct HttpEndpoint {
  std::string url;
  std::map<std::string, std::string> headers;
  std::string prompt_field = "prompt";
  std::string response_field = "story";
  std::string model;  // optional "model" body field
  double timeout_s = 30.0;
};

class HttpJsonProvider : public CompletionProvider {
 public:
  explicit HttpJsonProvider(HttpEndpoint endpoint);
  ProviderResult complete(const ProviderRequest& request) override;
  std::string describe() const override { return "http:" + endpoint_.url; }

 private:
  HttpEndpoint endpoint_;
  std::string host_;
  std::string path_;
};

// Builds a provider from a {"type": "mock"|"http", ...} JSON file.
std::unique_ptr<CompletionProvider> make_provider(const std::string& config_path);

}  // namespace tinytok::orch
