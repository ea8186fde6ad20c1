#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tinytok::promptgen {

struct Lexicon {
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;
  std::vector<std::string> adjectives;
  std::vector<std::string> features;  // conclusion/tone descriptors
};

// Loads nouns.txt / verbs.txt / adjectives.txt (one entry per line, blanks
// skipped) and features.json (a JSON array of strings) from a directory,
// then validates.
Lexicon load_lexicon_dir(const std::string& dir);

// Every list non-empty, entries unique and non-blank, and at most 9999
// entries per list so the zero-padded 4-digit id scheme stays injective.
void validate_lexicon(const Lexicon& lex);

struct PromptKey {
  std::uint32_t noun = 0;
  std::uint32_t verb = 0;
  std::uint32_t adjective = 0;
  std::uint32_t feature = 0;

  // Zero-padded indices joined with dashes, e.g. "0007-0123-0045-0210".
  std::string quad_id() const;
  // The id without the feature slot, e.g. "0007-0123-0045".
  std::string triplet_id() const;
};

struct GeneratedPrompt {
  PromptKey key;
  std::string id;  // quad id; unique within a batch
  std::string text;
};

struct PromptBatch {
  std::vector<GeneratedPrompt> prompts;
  std::uint64_t draws = 0;            // total samples taken
  std::uint64_t duplicate_count = 0;  // rejected draws
};

// Uniqueness regimes: the strict mode rejects any draw whose
// (noun, verb, adjective) triplet was already used, so a combination never
// recurs even with a different tone; the quad mode only rejects full
// repeats.
enum class UniquenessMode { triplet, quad };

std::uint64_t capacity(const Lexicon& lex, UniquenessMode mode);

// Renders the fixed story-request template.  All slots must be non-empty.
std::string render_template(const std::string& language, const std::string& noun,
                            const std::string& verb, const std::string& adjective,
                            const std::string& feature);

// Rejection-sampled batch of `target` unique prompts.  Errors: invalid
// lexicon, target exceeding capacity, or the circuit breaker tripping after
// target * 1000 draws (a liveness guard; it cannot fire when the capacity
// precondition holds with sane targets).
PromptBatch generate(const Lexicon& lex, std::size_t target, std::uint64_t seed,
                     const std::string& language, UniquenessMode mode = UniquenessMode::triplet);

struct DedupEstimate {
  std::size_t trials = 0;
  double mean_duplicates = 0.0;
  double stddev_duplicates = 0.0;  // 0 when trials < 2
  // Closed form E[draws] - target where E[draws] = M * (H_M - H_{M-target})
  // for capacity M (coupon-collector partial sum).
  double expected_duplicates = 0.0;
  std::uint64_t capacity = 0;
};

// Monte-Carlo duplicate-rate study plus the analytic expectation, for
// calibrating how much rejection a target implies.
DedupEstimate dedup_rate_estimate(const Lexicon& lex, std::size_t target, std::size_t trials,
                                  std::uint64_t seed, UniquenessMode mode = UniquenessMode::triplet);

}  // namespace tinytok::promptgen
