#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tinytok/corpus.hpp"

namespace tinytok::bpe {

struct TokenizerOptions {
  // When true the initial symbols are the raw UTF-8 bytes and vocab/merges
  // entries of the form <0xHH> denote single bytes; otherwise initial
  // symbols are Unicode code points.
  bool byte_fallback = false;
  // Token emitted for symbols outside the vocabulary; unset means an
  // unencodable symbol is an error.
  std::optional<std::string> unk;
  // When true, merges never cross whitespace boundaries: the text is split
  // into alternating non-space/space segments that are encoded separately.
  bool pre_split = false;
};

// Reads a {"byte_fallback": bool, "unk": string|null, "pre_split": bool}
// options file; absent keys keep their defaults.
TokenizerOptions load_options(const std::string& path);

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const {
    const std::size_t h1 = std::hash<std::string>{}(p.first);
    const std::size_t h2 = std::hash<std::string>{}(p.second);
    return h1 ^ (h2 + 0x9E3779B97F4A7C15ULL + (h1 << 6) + (h1 >> 2));
  }
};

class Tokenizer {
 public:
  std::string name;
  TokenizerOptions options;
  std::unordered_map<std::string, int> vocab;         // token -> id (ids may be sparse)
  std::unordered_map<int, std::string> id_to_token;
  std::vector<std::pair<std::string, std::string>> merges;  // rank = position
  std::unordered_map<std::pair<std::string, std::string>, int, PairHash> merge_rank;
  std::optional<int> unk_id;

  std::size_t vocab_size() const { return vocab.size(); }

  // Greedy BPE: repeatedly applies the lowest-rank applicable merge,
  // breaking rank ties towards the leftmost occurrence.
  std::vector<int> encode(std::string_view text) const;

  // Concatenation of the token strings; ids not in the vocabulary are an
  // error.
  std::string decode(const std::vector<int>& ids) const;

 private:
  void encode_segment(std::string_view segment, std::vector<int>& out) const;
};

// Builds a tokenizer from a {"token": id} vocab JSON and a merges.txt with
// one "left right" pair per line.  Validates that ids are unique and
// non-negative and that every merge's concatenation is in the vocabulary.
Tokenizer load_tokenizer(const std::string& vocab_path, const std::string& merges_path,
                         const TokenizerOptions& options, std::string name = "");

// Convenience loader for a directory holding vocab.json, merges.txt and
// (optionally) tokenizer-options.json.
Tokenizer load_tokenizer_dir(const std::string& dir);

struct FertilityReport {
  std::uint64_t tokens = 0;
  std::uint64_t words = 0;      // whitespace-delimited words
  double fertility = 0.0;       // tokens per word
};

// Corpus-level tokens-per-word ratio.  Requires at least one word.
FertilityReport fertility(const Tokenizer& tok, const corpus::StoryCorpus& corpus,
                          std::size_t threads = 1);

}  // namespace tinytok::bpe
