#include "tinytok/orchestrator.hpp"

#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"
#include "tinytok/rng.hpp"
#include "tinytok/sha256.hpp"
#include "tinytok/version.hpp"

namespace tinytok::orch {

using nlohmann::json;

SlidingWindowLimiter::SlidingWindowLimiter(double rps_limit) {
  if (!(rps_limit > 0.0)) throw UserError("rps limit must be positive");
  if (rps_limit >= 1.0) {
    burst_ = static_cast<std::size_t>(rps_limit);
    window_ = std::chrono::seconds(1);
  } else {
    burst_ = 1;
    window_ = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / rps_limit));
  }
}

void SlidingWindowLimiter::acquire() {
  // Guard pad between the window test and the next admission; it absorbs the
  // gap between this thread being admitted and the provider timestamping the
  // call, so an external observer also sees at most `burst_` per window.
  constexpr auto kGuard = std::chrono::milliseconds(50);
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    if (recent_.size() < burst_) {
      recent_.push_back(now);
      cv_.notify_all();
      return;
    }
    const auto oldest = recent_.front();
    const auto free_at = oldest + window_ + kGuard;
    if (now >= free_at) {
      recent_.pop_front();
      recent_.push_back(now);
      cv_.notify_all();
      return;
    }
    cv_.wait_until(lock, free_at);
  }
}

RequestCache::RequestCache(std::size_t capacity) : capacity_(capacity) {}

RequestCache::Handle RequestCache::acquire(const std::string& key) {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) {
    map_.emplace(key, std::make_shared<Entry>());
    Handle h;
    h.owner = true;
    return h;
  }
  // Hold the entry by value: eviction may drop it from the map while we wait.
  std::shared_ptr<Entry> entry = it->second;
  cv_.wait(lock, [&] { return entry->ready; });
  Handle h;
  h.hit = true;
  h.result = entry->result;
  return h;
}

void RequestCache::fulfill(const std::string& key, const ProviderResult& result) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return;  // evicted owner slot; nothing to publish
  it->second->result = result;
  it->second->ready = true;
  lru_.push_front(key);
  while (lru_.size() > capacity_) {
    map_.erase(lru_.back());
    lru_.pop_back();
  }
  cv_.notify_all();
}

namespace {

struct PromptEntry {
  std::string id;
  std::string text;
};

std::vector<PromptEntry> load_prompts(const std::string& path) {
  std::vector<PromptEntry> prompts;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (line.empty()) return;  // blank separators are harmless in prompt files
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("prompt") || !j["prompt"].is_string()) {
      throw UserError("prompts line " + std::to_string(line_no) +
                      " is not {\"id\": str, \"prompt\": str}: " + path);
    }
    PromptEntry entry{j["id"].get<std::string>(), j["prompt"].get<std::string>()};
    if (entry.id.empty()) {
      throw UserError("prompts line " + std::to_string(line_no) + " has an empty id: " + path);
    }
    if (!seen.emplace(entry.id, line_no).second) {
      throw UserError("prompt id \"" + entry.id + "\" repeats at line " +
                      std::to_string(line_no) + ": " + path);
    }
    prompts.push_back(std::move(entry));
  });
  return prompts;
}

struct ResultRecord {
  std::size_t index = 0;
  std::string prompt_id;
  bool ok = false;
  int attempts = 0;
  std::string story;  // when ok
  std::string error;  // when failed
};

std::string story_id_for(std::size_t index) {
  std::string digits = std::to_string(index);
  return "s" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

std::string result_line(const ResultRecord& rec) {
  json j;
  j["type"] = "result";
  j["index"] = rec.index;
  j["prompt_id"] = rec.prompt_id;
  j["status"] = rec.ok ? "ok" : "failed";
  j["attempts"] = rec.attempts;
  if (rec.ok) {
    j["story"] = rec.story;
  } else {
    j["error"] = rec.error;
  }
  return j.dump();
}

// Parses an existing ledger for resume.  Only the final line may be
// unparseable (a torn write from a crash); anything else is corruption.
std::map<std::size_t, ResultRecord> read_ledger(const std::string& ledger_path,
                                                const std::string& prompts_digest,
                                                std::size_t prompt_count) {
  std::vector<std::string> lines;
  for_each_line(ledger_path, [&](std::size_t, const std::string& line) { lines.push_back(line); });
  if (lines.empty()) return {};

  std::map<std::size_t, ResultRecord> known;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j = json::parse(lines[i], nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      if (i + 1 == lines.size()) break;  // torn tail line is expected after a crash
      throw UserError("ledger corrupt at line " + std::to_string(i + 1) + ": " + ledger_path);
    }
    const std::string type = j.value("type", "");
    if (i == 0) {
      if (type != "header") {
        throw UserError("ledger is missing its header line: " + ledger_path);
      }
      if (j.value("prompts_sha256", "") != prompts_digest) {
        throw UserError("ledger was written for a different prompt file (checksum mismatch): " +
                        ledger_path);
      }
      if (j.value("prompt_count", std::size_t{0}) != prompt_count) {
        throw UserError("ledger prompt count does not match the prompt file: " + ledger_path);
      }
      continue;
    }
    if (type != "result") {
      throw UserError("ledger corrupt at line " + std::to_string(i + 1) + ": " + ledger_path);
    }
    ResultRecord rec;
    if (!j.contains("index") || !j["index"].is_number_unsigned()) {
      throw UserError("ledger corrupt at line " + std::to_string(i + 1) + ": " + ledger_path);
    }
    rec.index = j["index"].get<std::size_t>();
    rec.prompt_id = j.value("prompt_id", "");
    rec.attempts = j.value("attempts", 0);
    const std::string status = j.value("status", "");
    if (rec.index >= prompt_count || (status != "ok" && status != "failed")) {
      throw UserError("ledger corrupt at line " + std::to_string(i + 1) + ": " + ledger_path);
    }
    rec.ok = status == "ok";
    if (rec.ok) {
      if (!j.contains("story") || !j["story"].is_string()) {
        throw UserError("ledger corrupt at line " + std::to_string(i + 1) + ": " + ledger_path);
      }
      rec.story = j["story"].get<std::string>();
    } else {
      rec.error = j.value("error", "unknown error");
    }
    if (!known.emplace(rec.index, rec).second) {
      throw UserError("ledger records index " + std::to_string(rec.index) + " twice: " +
                      ledger_path);
    }
  }
  return known;
}

// Append-only ledger writer with explicit fsync checkpoints.
class LedgerFile {
 public:
  LedgerFile(const std::string& path, bool append) {
    file_ = std::fopen(path.c_str(), append ? "ab" : "wb");
    if (!file_) throw UserError("cannot open ledger for writing: " + path);
  }
  ~LedgerFile() {
    if (file_) std::fclose(file_);
  }
  LedgerFile(const LedgerFile&) = delete;
  LedgerFile& operator=(const LedgerFile&) = delete;

  void write_line(const std::string& line) {
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fputc('\n', file_);
  }
  void sync() {
    std::fflush(file_);
    ::fsync(fileno(file_));
  }

 private:
  std::FILE* file_ = nullptr;
};

double backoff_ms(const RetryPolicy& policy, std::uint64_t seed, const std::string& prompt_id,
                  int attempt) {
  double delay = policy.base_backoff_ms * std::pow(2.0, attempt - 1);
  delay = std::min(delay, policy.max_backoff_ms);
  const std::uint64_t h =
      splitmix64(seed ^ splitmix64(std::hash<std::string>{}(prompt_id)) ^
                 static_cast<std::uint64_t>(attempt));
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return delay * (1.0 + policy.jitter_frac * (2.0 * unit - 1.0));
}

}  // namespace

RunSummary run_generation(const std::string& prompts_path, CompletionProvider& provider,
                          const OrchestratorOptions& options, const std::string& stories_path,
                          const std::string& ledger_path, bool resume) {
  const auto t0 = std::chrono::steady_clock::now();
  if (options.parallelism == 0) throw UserError("parallelism must be positive");
  if (options.retry.max_attempts < 1) throw UserError("max attempts must be at least 1");
  if (options.checkpoint_every == 0) throw UserError("checkpoint interval must be positive");

  const std::vector<PromptEntry> prompts = load_prompts(prompts_path);
  if (prompts.empty()) throw UserError("prompt file is empty: " + prompts_path);
  const std::string prompts_digest = sha256_file_hex(prompts_path);

  std::map<std::size_t, ResultRecord> known;
  if (resume) {
    if (!std::filesystem::exists(ledger_path)) {
      throw UserError("no ledger to resume at " + ledger_path);
    }
    known = read_ledger(ledger_path, prompts_digest, prompts.size());
  }

  LedgerFile ledger(ledger_path, /*append=*/resume && !known.empty());
  if (!resume || known.empty()) {
    json header;
    header["type"] = "header";
    header["tool"] = kToolName;
    header["version"] = kVersion;
    header["prompts_sha256"] = prompts_digest;
    header["prompt_count"] = prompts.size();
    ledger.write_line(header.dump());
    ledger.sync();
  }

  // Work not already covered by the ledger.
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (!known.count(i)) todo.push_back(i);
  }

  SlidingWindowLimiter limiter(options.rps_limit);
  RequestCache cache(options.cache_capacity);

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> cache_hits{0};
  std::atomic<std::uint64_t> retries{0};

  // Completion-order queue feeding the single writer thread.
  std::mutex queue_mu;
  std::condition_variable queue_cv;
  std::deque<ResultRecord> queue;
  std::size_t producers = options.parallelism;

  auto attempt_request = [&](const PromptEntry& prompt) -> std::pair<ProviderResult, int> {
    for (int attempt = 1;; ++attempt) {
      limiter.acquire();
      ProviderResult result;
      try {
        result = provider.complete({prompt.id, prompt.text, options.params});
      } catch (const std::exception& e) {
        result = ProviderResult::fail(FailureKind::permanent,
                                      std::string("provider threw: ") + e.what());
      }
      if (result.ok || result.failure == FailureKind::permanent ||
          attempt >= options.retry.max_attempts) {
        return {result, attempt};
      }
      ++retries;
      const double delay = backoff_ms(options.retry, options.seed, prompt.id, attempt);
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
    }
  };

  auto worker = [&] {
    for (;;) {
      if (stop.load()) break;
      const std::size_t slot = cursor.fetch_add(1);
      if (slot >= todo.size()) break;
      const std::size_t index = todo[slot];
      const PromptEntry& prompt = prompts[index];

      ResultRecord rec;
      rec.index = index;
      rec.prompt_id = prompt.id;
      ProviderResult outcome;
      if (options.cache_enabled) {
        RequestCache::Handle handle = cache.acquire(prompt.text);
        if (handle.hit) {
          outcome = handle.result;
          rec.attempts = 0;  // served from cache, no provider call
          ++cache_hits;
        } else {
          try {
            auto [result, attempts] = attempt_request(prompt);
            outcome = result;
            rec.attempts = attempts;
          } catch (...) {
            // Never leave waiters blocked on an unfulfilled owner slot.
            cache.fulfill(prompt.text,
                          ProviderResult::fail(FailureKind::permanent, "internal error"));
            throw;
          }
          cache.fulfill(prompt.text, outcome);
        }
      } else {
        auto [result, attempts] = attempt_request(prompt);
        outcome = result;
        rec.attempts = attempts;
      }
      rec.ok = outcome.ok;
      if (outcome.ok) {
        rec.story = outcome.story;
      } else {
        rec.error = to_string(outcome.failure) + ": " + outcome.message;
      }
      {
        std::lock_guard<std::mutex> lock(queue_mu);
        queue.push_back(std::move(rec));
      }
      queue_cv.notify_all();
    }
    {
      std::lock_guard<std::mutex> lock(queue_mu);
      --producers;
    }
    queue_cv.notify_all();
  };

  // Stories stream out in input order: out-of-order completions wait in a
  // reordering buffer that drains whenever the frontier advances (its size
  // is bounded by the completion skew, not the corpus).
  std::ofstream stories(stories_path, std::ios::binary | std::ios::trunc);
  if (!stories) throw UserError("cannot open stories output: " + stories_path);
  std::map<std::size_t, ResultRecord> all_results = known;
  std::size_t frontier = 0;
  auto flush_frontier = [&] {
    for (auto it = all_results.find(frontier);
         it != all_results.end() && it->first == frontier;
         it = all_results.find(++frontier)) {
      const ResultRecord& rec = it->second;
      if (rec.ok) {
        json j;
        j["id"] = story_id_for(rec.index);
        j["prompt_id"] = rec.prompt_id;
        j["story"] = rec.story;
        stories << j.dump() << '\n';
      }
    }
  };
  flush_frontier();  // resume: re-emit everything the ledger already covers

  std::size_t results_this_run = 0;
  std::size_t since_checkpoint = 0;
  auto writer = [&] {
    for (;;) {
      ResultRecord rec;
      {
        std::unique_lock<std::mutex> lock(queue_mu);
        queue_cv.wait(lock, [&] { return !queue.empty() || producers == 0; });
        if (queue.empty()) break;  // producers all gone and nothing left
        rec = std::move(queue.front());
        queue.pop_front();
      }
      ledger.write_line(result_line(rec));
      if (++since_checkpoint >= options.checkpoint_every) {
        ledger.sync();
        since_checkpoint = 0;
      }
      all_results[rec.index] = std::move(rec);
      flush_frontier();
      ++results_this_run;
      if (options.stop_after_results > 0 && results_this_run >= options.stop_after_results) {
        stop.store(true);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(options.parallelism);
  for (std::size_t w = 0; w < options.parallelism; ++w) pool.emplace_back(worker);
  std::thread writer_thread(writer);
  for (auto& t : pool) t.join();
  writer_thread.join();
  ledger.sync();
  stories.flush();
  if (!stories) throw UserError("write failed: " + stories_path);

  RunSummary summary;
  summary.prompts = prompts.size();
  summary.submitted = results_this_run;
  summary.cache_hits = cache_hits.load();
  summary.retries = retries.load();
  summary.stopped_early = stop.load() && all_results.size() < prompts.size();
  for (const auto& [index, rec] : all_results) {
    (void)index;
    if (rec.ok) {
      ++summary.completed;
    } else {
      ++summary.failed;
      summary.failures.emplace_back(rec.prompt_id, rec.error);
    }
  }
  summary.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return summary;
}

}  // namespace tinytok::orch
