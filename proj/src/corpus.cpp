#include "tinytok/corpus.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "tinytok/error.hpp"
#include "tinytok/sha256.hpp"
#include "tinytok/text.hpp"

namespace tinytok::corpus {

using nlohmann::json;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::unsplit: return "unsplit";
  }
  return "unsplit";
}

Split split_from_string(std::string_view s) {
  const std::string lower = text::ascii_lower(s);
  if (lower == "train") return Split::train;
  if (lower == "validation" || lower == "valid" || lower == "val") return Split::validation;
  if (lower == "unsplit" || lower.empty()) return Split::unsplit;
  throw UserError("unknown split name: " + std::string(s));
}

StoryCorpus load_jsonl(const std::string& path, Split split, SkipReport* skips) {
  StoryCorpus corpus;
  std::unordered_set<std::string> seen_ids;
  const std::string base = std::filesystem::path(path).filename().string();
  SkipReport local;
  SkipReport& report = skips ? *skips : local;

  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (line.empty()) {
      report.add(line_no, "empty line");
      return;
    }
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      report.add(line_no, "invalid JSON object");
      return;
    }
    auto story_it = j.find("story");
    if (story_it == j.end() || !story_it->is_string()) {
      report.add(line_no, "missing \"story\" string");
      return;
    }
    StoryRecord rec;
    rec.text = story_it->get<std::string>();
    if (text::canonical_form(rec.text).empty()) {
      report.add(line_no, "story text is empty");
      return;
    }
    auto id_it = j.find("id");
    if (id_it != j.end()) {
      if (!id_it->is_string()) {
        report.add(line_no, "\"id\" is not a string");
        return;
      }
      rec.id = id_it->get<std::string>();
      if (rec.id.empty()) {
        report.add(line_no, "\"id\" is empty");
        return;
      }
    } else {
      rec.id = base + ":" + std::to_string(line_no);
    }
    if (!seen_ids.insert(rec.id).second) {
      report.add(line_no, "duplicate id: " + rec.id);
      return;
    }
    auto meta_it = j.find("metadata");
    if (meta_it != j.end() && meta_it->is_object()) {
      for (const auto& [key, value] : meta_it->items()) {
        rec.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    rec.split = split;
    corpus.records.push_back(std::move(rec));
  });
  return corpus;
}

void save_jsonl(const std::string& path, const StoryCorpus& corpus) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UserError("cannot open file for writing: " + path);
  for (const auto& rec : corpus.records) {
    json j;
    j["id"] = rec.id;
    j["story"] = rec.text;
    if (!rec.metadata.empty()) j["metadata"] = rec.metadata;
    out << j.dump() << '\n';
  }
  if (!out) throw UserError("write failed: " + path);
}

std::string dedup_key(std::string_view text_in) {
  return sha256_hex(text::canonical_form(text_in));
}

namespace {

// Hashing dominates, so keys are computed in parallel over contiguous
// chunks; grouping afterwards is sequential and order-stable.
std::vector<std::string> all_keys(const StoryCorpus& corpus, std::size_t threads) {
  std::vector<std::string> keys(corpus.records.size());
  parallel_chunks(corpus.records.size(), threads,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t i = begin; i < end; ++i) {
                      keys[i] = dedup_key(corpus.records[i].text);
                    }
                  });
  return keys;
}

}  // namespace

DedupReport dedup_report(const StoryCorpus& corpus, std::size_t threads) {
  DedupReport report;
  report.total = corpus.records.size();
  if (report.total == 0) return report;

  const std::vector<std::string> keys = all_keys(corpus, threads);
  std::unordered_map<std::string, std::size_t> first_index;  // digest -> group slot
  std::vector<DuplicateGroup> groups;                        // all groups, insertion order
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, inserted] = first_index.try_emplace(keys[i], groups.size());
    if (inserted) {
      groups.push_back({keys[i], {corpus.records[i].id}});
    } else {
      groups[it->second].member_ids.push_back(corpus.records[i].id);
    }
  }
  report.unique = groups.size();
  report.duplicates = report.total - report.unique;
  report.duplicate_ratio = static_cast<double>(report.duplicates) / static_cast<double>(report.total);
  for (auto& g : groups) {
    if (g.member_ids.size() >= 2) report.duplicate_groups.push_back(std::move(g));
  }
  return report;
}

OverlapReport split_overlap(const StoryCorpus& a, const StoryCorpus& b, std::size_t threads) {
  const std::vector<std::string> keys_a = all_keys(a, threads);
  const std::vector<std::string> keys_b = all_keys(b, threads);

  std::unordered_map<std::string, std::vector<std::string>> ids_by_key_a;
  for (std::size_t i = 0; i < keys_a.size(); ++i) {
    ids_by_key_a[keys_a[i]].push_back(a.records[i].id);
  }
  OverlapReport report;
  std::unordered_map<std::string, std::size_t> group_slot;  // digest -> index in groups
  for (std::size_t i = 0; i < keys_b.size(); ++i) {
    auto hit = ids_by_key_a.find(keys_b[i]);
    if (hit == ids_by_key_a.end()) continue;
    auto [it, inserted] = group_slot.try_emplace(keys_b[i], report.groups.size());
    if (inserted) {
      report.groups.push_back({keys_b[i], hit->second, {}});
    }
    report.groups[it->second].ids_b.push_back(b.records[i].id);
  }
  report.overlap = report.groups.size();
  return report;
}

StoryCorpus merge_dedup(const StoryCorpus& a, const StoryCorpus& b, std::size_t threads) {
  StoryCorpus out;
  out.language = !a.language.empty() ? a.language : b.language;
  const std::vector<std::string> keys_a = all_keys(a, threads);
  const std::vector<std::string> keys_b = all_keys(b, threads);

  std::unordered_set<std::string> seen_keys;
  std::unordered_set<std::string> used_ids;
  auto add = [&](const StoryRecord& rec, const std::string& key) {
    if (!seen_keys.insert(key).second) return;
    StoryRecord copy = rec;
    if (!used_ids.insert(copy.id).second) {
      std::size_t k = 2;
      std::string candidate;
      do {
        candidate = copy.id + "#" + std::to_string(k++);
      } while (!used_ids.insert(candidate).second);
      copy.id = candidate;
    }
    out.records.push_back(std::move(copy));
  };
  for (std::size_t i = 0; i < a.records.size(); ++i) add(a.records[i], keys_a[i]);
  for (std::size_t i = 0; i < b.records.size(); ++i) add(b.records[i], keys_b[i]);
  return out;
}

}  // namespace tinytok::corpus
