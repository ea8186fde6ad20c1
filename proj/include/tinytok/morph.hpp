#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tinytok/io.hpp"
#include "tinytok/tokenizer.hpp"

namespace tinytok::morph {

// A gold segmentation: word == concatenation of morphemes.  All strings are
// stored NFC-normalized.
struct MorphEntry {
  std::string word;
  std::vector<std::string> morphemes;
};

// Streams a JSONL file of {"word": str, "morphemes": [str, ...]}.  Lines
// with bad JSON, fewer than two morphemes, empty pieces, or morphemes that
// do not concatenate to the word (after NFC) are skipped and counted.
std::vector<MorphEntry> load_morph_set(const std::string& path, SkipReport* skips = nullptr);

// Interior split points of a piece sequence, measured in Unicode scalar
// offsets from the start (piece lengths accumulated; the final offset is
// dropped).  Piece boundaries that fall inside a code point (possible with
// byte-level tokens) are not valid scalar offsets and are dropped too.
std::vector<std::size_t> interior_boundaries(const std::vector<std::string>& pieces);

struct MorphOptions {
  // Subset criterion by default: a word scores 1 when every gold boundary is
  // also a token boundary.  Exact mode requires the two boundary sets to be
  // equal.
  bool exact = false;
  // Prefix prepended before encoding (e.g. "▁" or " ") for tokenizers
  // that mark word-initial pieces; boundary offsets are taken relative to
  // the word itself.
  std::string word_marker;
};

struct WordResult {
  std::string word;
  bool correct = false;
};

struct MorphReport {
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  double score = 0.0;  // correct / evaluated
  std::vector<WordResult> per_word;
};

// Scores each word tokenized in isolation.  Empty evaluation sets and
// untokenizable words are errors.
MorphReport morph_score(const bpe::Tokenizer& tok, const std::vector<MorphEntry>& entries,
                        const MorphOptions& options = {});

}  // namespace tinytok::morph
