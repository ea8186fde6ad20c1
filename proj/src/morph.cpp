#include "tinytok/morph.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <unordered_map>

#include "tinytok/error.hpp"
#include "tinytok/text.hpp"

namespace tinytok::morph {

using nlohmann::json;

std::vector<MorphEntry> load_morph_set(const std::string& path, SkipReport* skips) {
  std::vector<MorphEntry> entries;
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
    auto word_it = j.find("word");
    auto morph_it = j.find("morphemes");
    if (word_it == j.end() || !word_it->is_string() || morph_it == j.end() ||
        !morph_it->is_array()) {
      report.add(line_no, "expected {\"word\": str, \"morphemes\": [str...]}");
      return;
    }
    MorphEntry entry;
    entry.word = text::nfc(word_it->get<std::string>());
    if (entry.word.empty()) {
      report.add(line_no, "empty word");
      return;
    }
    std::string concat;
    for (const auto& piece : *morph_it) {
      if (!piece.is_string()) {
        report.add(line_no, "morpheme is not a string");
        return;
      }
      std::string m = text::nfc(piece.get<std::string>());
      if (m.empty()) {
        report.add(line_no, "empty morpheme");
        return;
      }
      concat += m;
      entry.morphemes.push_back(std::move(m));
    }
    if (entry.morphemes.size() < 2) {
      report.add(line_no, "needs at least two morphemes");
      return;
    }
    if (concat != entry.word) {
      report.add(line_no, "morphemes do not concatenate to the word");
      return;
    }
    entries.push_back(std::move(entry));
  });
  return entries;
}

namespace {

// Maps a byte offset inside s to its Unicode scalar index, for offsets that
// land on a code point boundary.
std::unordered_map<std::size_t, std::size_t> scalar_offsets(const std::string& s) {
  std::unordered_map<std::size_t, std::size_t> map;
  std::size_t scalar = 0;
  for (std::size_t byte = 0; byte <= s.size(); ++byte) {
    if (byte == s.size() ||
        (static_cast<unsigned char>(s[byte]) & 0xC0) != 0x80) {
      map.emplace(byte, scalar++);
    }
  }
  return map;
}

}  // namespace

std::vector<std::size_t> interior_boundaries(const std::vector<std::string>& pieces) {
  std::string whole;
  for (const auto& p : pieces) whole += p;
  const auto offsets = scalar_offsets(whole);
  std::vector<std::size_t> out;
  std::size_t byte = 0;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    byte += pieces[i].size();
    auto it = offsets.find(byte);
    if (it != offsets.end() && it->second > 0) out.push_back(it->second);
  }
  return out;
}

MorphReport morph_score(const bpe::Tokenizer& tok, const std::vector<MorphEntry>& entries,
                        const MorphOptions& options) {
  if (entries.empty()) throw UserError("morph evaluation set is empty");
  const std::size_t marker_scalars = text::scalar_length(options.word_marker);

  MorphReport report;
  for (const MorphEntry& entry : entries) {
    // Gold boundaries: cumulative scalar lengths of the morphemes, interior only.
    std::set<std::size_t> gold;
    std::size_t acc = 0;
    for (std::size_t i = 0; i + 1 < entry.morphemes.size(); ++i) {
      acc += text::scalar_length(entry.morphemes[i]);
      gold.insert(acc);
    }

    std::vector<int> ids;
    try {
      ids = tok.encode(options.word_marker + entry.word);
    } catch (const UserError& e) {
      throw UserError("word \"" + entry.word + "\" is not tokenizable: " + e.what());
    }
    std::vector<std::string> pieces;
    pieces.reserve(ids.size());
    for (int id : ids) pieces.push_back(tok.id_to_token.at(id));

    std::set<std::size_t> token_bounds;
    for (std::size_t b : interior_boundaries(pieces)) {
      if (b <= marker_scalars) continue;  // splits inside or at the marker
      token_bounds.insert(b - marker_scalars);
    }
    // Offsets at or past the word end are not interior word boundaries.
    const std::size_t word_len = text::scalar_length(entry.word);
    std::erase_if(token_bounds, [&](std::size_t b) { return b >= word_len; });

    const bool correct =
        options.exact ? token_bounds == gold
                      : std::includes(token_bounds.begin(), token_bounds.end(), gold.begin(),
                                      gold.end());
    report.per_word.push_back({entry.word, correct});
    if (correct) ++report.correct;
  }
  report.evaluated = entries.size();
  report.score = static_cast<double>(report.correct) / static_cast<double>(report.evaluated);
  return report;
}

}  // namespace tinytok::morph
