#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tinytok/provider.hpp"

namespace tinytok::orch {

// Admission-time sliding-window limiter: keeps the timestamps of the last
// `burst` admissions and blocks until the oldest leaves the window, so at
// most floor(rps) requests ever start within any one-second span (for
// sub-1 rps the window stretches to 1/rps).  A small guard pad absorbs
// scheduler jitter between admission and the provider observing the call.
class SlidingWindowLimiter {
 public:
  explicit SlidingWindowLimiter(double rps_limit);

  void acquire();  // blocks until a slot is free, then records the admission

  std::size_t burst() const { return burst_; }
  std::chrono::nanoseconds window() const { return window_; }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t burst_;
  std::chrono::nanoseconds window_;
  std::deque<std::chrono::steady_clock::time_point> recent_;
};

// Single-flight LRU keyed by prompt text.  The first caller for a key
// becomes its owner and must fulfill() after computing; concurrent callers
// for the same key block until the result lands, so duplicates never cause
// a second provider call while the first is in flight.  Capacity counts
// completed entries (in-flight ones are pinned); failures are cached too so
// duplicates share one outcome.
class RequestCache {
 public:
  explicit RequestCache(std::size_t capacity);

  struct Handle {
    bool owner = false;  // caller must compute and fulfill()
    bool hit = false;    // result below is valid
    ProviderResult result;
  };

  Handle acquire(const std::string& key);
  void fulfill(const std::string& key, const ProviderResult& result);

 private:
  struct Entry {
    bool ready = false;
    ProviderResult result;
  };
  std::mutex mu_;
  std::condition_variable cv_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> map_;
  std::list<std::string> lru_;  // most recent first; ready entries only
  std::size_t capacity_;
};

struct RetryPolicy {
  int max_attempts = 5;
  double base_backoff_ms = 100.0;
  double max_backoff_ms = 10000.0;
  double jitter_frac = 0.1;  // +/- proportional jitter, deterministic per (id, attempt)
};

struct OrchestratorOptions {
  std::size_t parallelism = 4;
  double rps_limit = 5.0;
  RetryPolicy retry;
  std::size_t checkpoint_every = 100;  // fsync the ledger every N results
  bool cache_enabled = true;
  std::size_t cache_capacity = 4096;
  std::uint64_t seed = 0;  // drives backoff jitter only
  GenerationParams params;
  // Test/ops hook for graceful interruption: stop claiming new prompts once
  // this many results have been recorded this run (0 = run to completion).
  std::size_t stop_after_results = 0;
};

struct RunSummary {
  std::size_t prompts = 0;        // prompts in the input file
  std::size_t submitted = 0;      // prompts processed this run
  std::size_t completed = 0;      // ok results in the final state
  std::size_t failed = 0;         // permanent failures in the final state
  std::size_t cache_hits = 0;     // this run
  std::uint64_t retries = 0;      // provider attempts beyond the first, this run
  double wall_ms = 0.0;
  bool stopped_early = false;
  std::vector<std::pair<std::string, std::string>> failures;  // (prompt id, reason)
};

// Drives prompts.jsonl ({"id", "prompt"} per line) through the provider with
// a worker pool, rate limiting, retry with exponential backoff, optional
// request caching, and an append-only ledger checkpoint.  Story records
// ({"id", "prompt_id", "story"}) come out in input order regardless of
// completion order.  With resume=true the ledger is validated against the
// prompt file's SHA-256 and already-recorded prompts are not re-requested;
// a torn final ledger line (crash mid-write) is tolerated.
RunSummary run_generation(const std::string& prompts_path, CompletionProvider& provider,
                          const OrchestratorOptions& options, const std::string& stories_path,
                          const std::string& ledger_path, bool resume = false);

}  // namespace tinytok::orch
