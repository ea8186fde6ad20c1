#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tinytok/io.hpp"

namespace tinytok::corpus {

enum class Split { train, validation, unsplit };

std::string to_string(Split split);
Split split_from_string(std::string_view s);  // throws UserError on unknown names

struct StoryRecord {
  std::string id;
  std::string text;
  Split split = Split::unsplit;
  std::map<std::string, std::string> metadata;
};

struct StoryCorpus {
  std::string language;  // free-form label carried into reports; may be empty
  std::vector<StoryRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Streams a JSONL file where each line is an object with a "story" string
// and optional "id" and "metadata" members.  Malformed lines (bad JSON,
// missing/empty story, repeated id) are skipped and counted, never fatal.
// Records without an id get "<basename>:<line>".
StoryCorpus load_jsonl(const std::string& path, Split split = Split::unsplit,
                       SkipReport* skips = nullptr);

void save_jsonl(const std::string& path, const StoryCorpus& corpus);

// SHA-256 of the canonical text form (NFC, whitespace collapsed, trimmed).
// Two records are duplicates exactly when their keys are equal.
std::string dedup_key(std::string_view text);

struct DuplicateGroup {
  std::string digest;
  std::vector<std::string> member_ids;  // first member is the kept occurrence
};

struct DedupReport {
  std::size_t total = 0;
  std::size_t unique = 0;
  std::size_t duplicates = 0;       // total - unique
  double duplicate_ratio = 0.0;     // duplicates / total, 0 for an empty corpus
  std::vector<DuplicateGroup> duplicate_groups;  // only groups with >= 2 members
};

DedupReport dedup_report(const StoryCorpus& corpus, std::size_t threads = 1);

struct OverlapGroup {
  std::string digest;
  std::vector<std::string> ids_a;
  std::vector<std::string> ids_b;
};

// Cross-corpus contamination check: how many distinct canonical texts occur
// in both corpora.  Groups are ordered by the text's first occurrence in b.
struct OverlapReport {
  std::size_t overlap = 0;  // number of shared distinct texts
  std::vector<OverlapGroup> groups;
};

OverlapReport split_overlap(const StoryCorpus& a, const StoryCorpus& b,
                            std::size_t threads = 1);

// Union of both corpora with exact-duplicate texts removed; a's records take
// precedence and input order is preserved.  If a record from b collides with
// an already-used id, the id gets a "#k" suffix to keep ids unique.
StoryCorpus merge_dedup(const StoryCorpus& a, const StoryCorpus& b,
                        std::size_t threads = 1);

}  // namespace tinytok::corpus
