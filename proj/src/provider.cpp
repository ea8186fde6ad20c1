#include "tinytok/provider.hpp"

#include <json.hpp>

// httplib pulls in OpenSSL support only when asked; plain HTTP is enough for
// the generic JSON adapter.
#include <httplib.h>

#include <array>
#include <thread>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"
#include "tinytok/rng.hpp"
#include "tinytok/sha256.hpp"

namespace tinytok::orch {

using nlohmann::json;

std::string to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::none: return "none";
    case FailureKind::rate_limited: return "rate_limited";
    case FailureKind::transient: return "transient";
    case FailureKind::permanent: return "permanent";
  }
  return "none";
}

MockProvider::MockProvider(MockScript script)
    : script_(std::move(script)), start_(std::chrono::steady_clock::now()) {}

ProviderResult MockProvider::complete(const ProviderRequest& request) {
  int attempt = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    call_times_ms_.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count());
    attempt = ++attempts_[request.id];
  }
  if (script_.latency_ms > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(script_.latency_ms));
  }
  const MockScript::Rule* rule = &script_.default_rule;
  if (auto it = script_.by_id.find(request.id); it != script_.by_id.end()) rule = &it->second;
  if (attempt <= rule->fail_attempts) {
    return ProviderResult::fail(rule->kind,
                                "scripted " + to_string(rule->kind) + " failure, attempt " +
                                    std::to_string(attempt));
  }
  return ProviderResult::success(story_for(request.prompt));
}

std::uint64_t MockProvider::call_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return call_times_ms_.size();
}

std::vector<double> MockProvider::call_times_ms() const {
  std::lock_guard<std::mutex> lock(mu_);
  return call_times_ms_;
}

std::string MockProvider::story_for(const std::string& prompt) {
  // Words the template quotes (verb, noun, adjective, tone) get woven into a
  // small deterministic story so downstream corpus/metric stages see
  // realistic per-prompt variation.
  std::vector<std::string> quoted;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = prompt.find('"', pos);
    if (open == std::string::npos) break;
    const std::size_t close = prompt.find('"', open + 1);
    if (close == std::string::npos) break;
    const std::string word = prompt.substr(open + 1, close - open - 1);
    if (!word.empty() && word.size() < 40 && quoted.size() < 4) quoted.push_back(word);
    pos = close + 1;
  }
  while (quoted.size() < 4) quoted.push_back("something");

  static const std::array<const char*, 8> kOpeners = {
      "Once upon a time", "One sunny morning", "Long ago",        "One quiet evening",
      "Early one day",    "One rainy night",   "Deep in a valley", "High on a hill"};
  static const std::array<const char*, 8> kHeroes = {
      "a little fox", "a kind girl", "a small boy",   "an old turtle",
      "a brave bird", "a tiny mouse", "a gentle bear", "a curious cat"};
  static const std::array<const char*, 6> kClosers = {
      "Everyone smiled and went home happy.",
      "From that day on they were best friends.",
      "The whole village cheered with joy.",
      "And so the day ended peacefully.",
      "They never forgot that special day.",
      "It became their favorite story to tell."};

  const std::string digest = sha256_hex(prompt);
  std::uint64_t seed = 0;
  for (int i = 0; i < 16; ++i) {
    const char c = digest[static_cast<std::size_t>(i)];
    seed = seed * 16 + static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  Rng rng(seed);
  std::string story;
  story += kOpeners[rng.bounded(kOpeners.size())];
  story += ", ";
  story += kHeroes[rng.bounded(kHeroes.size())];
  story += " found a " + quoted[1] + " that looked very " + quoted[2] + ". ";
  story += "They decided to " + quoted[0] + " together all afternoon. ";
  story += "In the end the feeling of " + quoted[3] + " filled the air. ";
  story += kClosers[rng.bounded(kClosers.size())];
  story += " [" + digest.substr(0, 8) + "]";
  return story;
}

namespace {

// Splits "http://host:port/path" into host:port and path.  Only plain HTTP
// is supported by the built-in adapter.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::string prefix = "http://";
  if (url.rfind(prefix, 0) != 0) {
    throw UserError("http provider urls must start with http:// (got \"" + url + "\")");
  }
  const std::size_t host_start = prefix.size();
  const std::size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url.substr(host_start), "/"};
  return {url.substr(host_start, slash - host_start), url.substr(slash)};
}

}  // namespace

HttpJsonProvider::HttpJsonProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  auto [host, path] = split_url(endpoint_.url);
  host_ = std::move(host);
  path_ = std::move(path);
}

ProviderResult HttpJsonProvider::complete(const ProviderRequest& request) {
  httplib::Client client(host_);
  client.set_connection_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
  client.set_read_timeout(std::chrono::duration<double>(endpoint_.timeout_s));

  httplib::Headers headers;
  for (const auto& [k, v] : endpoint_.headers) headers.emplace(k, v);

  json body;
  body[endpoint_.prompt_field] = request.prompt;
  body["max_tokens"] = request.params.max_tokens;
  body["temperature"] = request.params.temperature;
  if (!endpoint_.model.empty()) body["model"] = endpoint_.model;

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    return ProviderResult::fail(FailureKind::transient,
                                "transport error: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    return ProviderResult::fail(FailureKind::rate_limited, "HTTP 429");
  }
  if (res->status == 408 || res->status >= 500) {
    return ProviderResult::fail(FailureKind::transient, "HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    return ProviderResult::fail(FailureKind::permanent, "HTTP " + std::to_string(res->status));
  }
  json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    return ProviderResult::fail(FailureKind::permanent, "response body is not a JSON object");
  }
  auto it = parsed.find(endpoint_.response_field);
  if (it == parsed.end() || !it->is_string()) {
    return ProviderResult::fail(FailureKind::permanent,
                                "response lacks string field \"" + endpoint_.response_field + "\"");
  }
  return ProviderResult::success(it->get<std::string>());
}

std::unique_ptr<CompletionProvider> make_provider(const std::string& config_path) {
  json j = json::parse(read_file(config_path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw UserError("invalid provider config: " + config_path);
  }
  const std::string type = j.value("type", "");
  if (type == "mock") {
    MockScript script;
    script.latency_ms = j.value("latency_ms", 0.0);
    auto parse_rule = [](const json& r) {
      MockScript::Rule rule;
      rule.fail_attempts = r.value("fail_attempts", 0);
      const std::string kind = r.value("kind", "transient");
      if (kind == "transient") {
        rule.kind = FailureKind::transient;
      } else if (kind == "rate_limited") {
        rule.kind = FailureKind::rate_limited;
      } else if (kind == "permanent") {
        rule.kind = FailureKind::permanent;
      } else {
        throw UserError("unknown mock failure kind: " + kind);
      }
      return rule;
    };
    if (j.contains("default")) script.default_rule = parse_rule(j["default"]);
    if (j.contains("by_id")) {
      for (const auto& [id, rule] : j["by_id"].items()) {
        script.by_id[id] = parse_rule(rule);
      }
    }
    return std::make_unique<MockProvider>(std::move(script));
  }
  if (type == "http") {
    HttpEndpoint ep;
    ep.url = j.value("url", "");
    if (ep.url.empty()) throw UserError("http provider needs a \"url\": " + config_path);
    ep.prompt_field = j.value("prompt_field", ep.prompt_field);
    ep.response_field = j.value("response_field", ep.response_field);
    ep.model = j.value("model", "");
    ep.timeout_s = j.value("timeout_s", ep.timeout_s);
    if (j.contains("headers")) {
      for (const auto& [k, v] : j["headers"].items()) {
        if (v.is_string()) ep.headers[k] = v.get<std::string>();
      }
    }
    return std::make_unique<HttpJsonProvider>(std::move(ep));
  }
  throw UserError("provider \"type\" must be \"mock\" or \"http\": " + config_path);
}

}  // namespace tinytok::orch
