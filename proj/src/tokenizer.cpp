#include "tinytok/tokenizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <queue>
#include <sstream>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"
#include "tinytok/text.hpp"

namespace tinytok::bpe {

using nlohmann::json;

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// In byte-fallback mode, vocab and merges files spell raw bytes as <0xHH>
// so they stay representable in JSON and whitespace-delimited merges.
std::string decode_byte_escapes(const std::string& token, bool byte_fallback) {
  if (!byte_fallback || token.size() != 6) return token;
  if (token.rfind("<0x", 0) != 0 || token.back() != '>') return token;
  const int hi = hex_value(token[3]);
  const int lo = hex_value(token[4]);
  if (hi < 0 || lo < 0) return token;
  return std::string(1, static_cast<char>((hi << 4) | lo));
}

}  // namespace

TokenizerOptions load_options(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw UserError("invalid tokenizer options file: " + path);
  }
  TokenizerOptions opts;
  if (auto it = j.find("byte_fallback"); it != j.end()) {
    if (!it->is_boolean()) throw UserError("\"byte_fallback\" must be a boolean: " + path);
    opts.byte_fallback = it->get<bool>();
  }
  if (auto it = j.find("pre_split"); it != j.end()) {
    if (!it->is_boolean()) throw UserError("\"pre_split\" must be a boolean: " + path);
    opts.pre_split = it->get<bool>();
  }
  if (auto it = j.find("unk"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw UserError("\"unk\" must be a string or null: " + path);
    opts.unk = it->get<std::string>();
  }
  return opts;
}

Tokenizer load_tokenizer(const std::string& vocab_path, const std::string& merges_path,
                         const TokenizerOptions& options, std::string name) {
  Tokenizer tok;
  tok.name = name.empty() ? std::filesystem::path(vocab_path).parent_path().filename().string()
                          : std::move(name);
  tok.options = options;

  json vj = json::parse(read_file(vocab_path), nullptr, /*allow_exceptions=*/false);
  if (vj.is_discarded() || !vj.is_object()) {
    throw UserError("invalid vocab JSON: " + vocab_path);
  }
  for (const auto& [raw_token, value] : vj.items()) {
    if (!value.is_number_integer()) {
      throw UserError("vocab id for \"" + raw_token + "\" is not an integer: " + vocab_path);
    }
    const int id = value.get<int>();
    if (id < 0) throw UserError("negative vocab id for \"" + raw_token + "\": " + vocab_path);
    const std::string token = decode_byte_escapes(raw_token, options.byte_fallback);
    if (token.empty()) throw UserError("empty token in vocab: " + vocab_path);
    if (!tok.vocab.emplace(token, id).second) {
      throw UserError("token \"" + raw_token + "\" appears twice in vocab: " + vocab_path);
    }
    if (!tok.id_to_token.emplace(id, token).second) {
      throw UserError("vocab id " + std::to_string(id) + " assigned twice: " + vocab_path);
    }
  }

  for_each_line(merges_path, [&](std::size_t line_no, const std::string& line) {
    if (line.empty() || line[0] == '#') return;  // headers like "#version: ..." are common
    std::istringstream parts(line);
    std::string left, right, extra;
    if (!(parts >> left >> right) || (parts >> extra)) {
      throw UserError("merges line " + std::to_string(line_no) +
                      " is not \"left right\": " + merges_path);
    }
    left = decode_byte_escapes(left, options.byte_fallback);
    right = decode_byte_escapes(right, options.byte_fallback);
    if (!tok.vocab.count(left + right)) {
      throw UserError("merge result \"" + left + right + "\" (line " +
                      std::to_string(line_no) + ") is not in the vocab: " + merges_path);
    }
    auto key = std::make_pair(left, right);
    if (tok.merge_rank.count(key)) {
      throw UserError("duplicate merge at line " + std::to_string(line_no) + ": " + merges_path);
    }
    tok.merge_rank.emplace(std::move(key), static_cast<int>(tok.merges.size()));
    tok.merges.emplace_back(left, right);
  });

  if (options.unk) {
    auto it = tok.vocab.find(*options.unk);
    if (it == tok.vocab.end()) {
      throw UserError("unk token \"" + *options.unk + "\" is not in the vocab");
    }
    tok.unk_id = it->second;
  }
  return tok;
}

Tokenizer load_tokenizer_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  const fs::path opts_path = root / "tokenizer-options.json";
  TokenizerOptions opts;
  if (fs::exists(opts_path)) opts = load_options(opts_path.string());
  return load_tokenizer((root / "vocab.json").string(), (root / "merges.txt").string(), opts,
                        root.filename().string());
}

namespace {

// Doubly linked list over the initial symbol slots plus a lazily invalidated
// min-heap of merge candidates.  Slot indices never move, so ordering by
// (rank, left slot) realizes the leftmost tie-break exactly, and generation
// counters reject candidates whose symbols have since been merged away.
struct Slot {
  std::string sym;
  int prev;
  int next;
  std::uint32_t gen = 0;
  bool alive = true;
};

struct Candidate {
  int rank;
  int left;
  int right;
  std::uint32_t gen_left;
  std::uint32_t gen_right;
};

struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.rank != b.rank) return a.rank > b.rank;  // min-heap on rank
    return a.left > b.left;                        // then leftmost
  }
};

}  // namespace

void Tokenizer::encode_segment(std::string_view segment, std::vector<int>& out) const {
  if (segment.empty()) return;

  std::vector<Slot> slots;
  if (options.byte_fallback) {
    slots.reserve(segment.size());
    for (char c : segment) {
      slots.push_back({std::string(1, c), 0, 0});
    }
  } else {
    for (char32_t cp : text::decode_utf8(segment)) {
      std::string sym;
      text::append_utf8(sym, cp);
      slots.push_back({std::move(sym), 0, 0});
    }
  }
  const int n = static_cast<int>(slots.size());
  for (int i = 0; i < n; ++i) {
    slots[static_cast<std::size_t>(i)].prev = i - 1;
    slots[static_cast<std::size_t>(i)].next = i + 1 < n ? i + 1 : -1;
  }

  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap;
  auto push_candidate = [&](int left, int right) {
    if (left < 0 || right < 0) return;
    const Slot& l = slots[static_cast<std::size_t>(left)];
    const Slot& r = slots[static_cast<std::size_t>(right)];
    auto it = merge_rank.find({l.sym, r.sym});
    if (it == merge_rank.end()) return;
    heap.push({it->second, left, right, l.gen, r.gen});
  };
  for (int i = 0; i + 1 < n; ++i) push_candidate(i, i + 1);

  while (!heap.empty()) {
    const Candidate cand = heap.top();
    heap.pop();
    Slot& l = slots[static_cast<std::size_t>(cand.left)];
    Slot& r = slots[static_cast<std::size_t>(cand.right)];
    if (!l.alive || !r.alive || l.next != cand.right || l.gen != cand.gen_left ||
        r.gen != cand.gen_right) {
      continue;  // stale candidate
    }
    l.sym += r.sym;
    ++l.gen;
    r.alive = false;
    l.next = r.next;
    if (r.next >= 0) slots[static_cast<std::size_t>(r.next)].prev = cand.left;
    push_candidate(l.prev, cand.left);
    push_candidate(cand.left, l.next);
  }

  for (int i = 0; i >= 0 && i < n;) {
    const Slot& s = slots[static_cast<std::size_t>(i)];
    auto it = vocab.find(s.sym);
    if (it != vocab.end()) {
      out.push_back(it->second);
    } else if (unk_id) {
      out.push_back(*unk_id);
    } else {
      throw UserError("symbol \"" + s.sym + "\" is not encodable and no unk token is set");
    }
    i = s.next;
  }
}

std::vector<int> Tokenizer::encode(std::string_view text_in) const {
  std::vector<int> ids;
  if (!options.pre_split) {
    encode_segment(text_in, ids);
    return ids;
  }
  // Alternate runs of whitespace / non-whitespace, each encoded on its own so
  // merges cannot bridge a word boundary.  Keeping the whitespace runs as
  // segments preserves the round-trip property.
  bool in_space = false;
  bool have_run = false;
  std::string run;
  auto flush = [&]() {
    if (!run.empty()) encode_segment(run, ids);
    run.clear();
  };
  for (char32_t cp : text::decode_utf8(text_in)) {
    const bool space = text::is_unicode_space(cp);
    if (have_run && space != in_space) flush();
    in_space = space;
    have_run = true;
    text::append_utf8(run, cp);
  }
  flush();
  return ids;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    auto it = id_to_token.find(id);
    if (it == id_to_token.end()) {
      throw UserError("id " + std::to_string(id) + " is not in the vocabulary");
    }
    out += it->second;
  }
  return out;
}

FertilityReport fertility(const Tokenizer& tok, const corpus::StoryCorpus& corpus,
                          std::size_t threads) {
  if (corpus.empty()) throw UserError("fertility needs a non-empty corpus");
  struct Partial {
    std::uint64_t tokens = 0;
    std::uint64_t words = 0;
  };
  std::vector<Partial> partials(parallel_chunk_count(corpus.size(), threads));
  parallel_chunks(corpus.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t c) {
    Partial p;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& text_i = corpus.records[i].text;
      p.tokens += tok.encode(text_i).size();
      p.words += text::split_whitespace(text_i).size();
    }
    partials[c] = p;
  });
  FertilityReport report;
  for (const Partial& p : partials) {
    report.tokens += p.tokens;
    report.words += p.words;
  }
  if (report.words == 0) throw UserError("fertility needs at least one word in the corpus");
  report.fertility = static_cast<double>(report.tokens) / static_cast<double>(report.words);
  return report;
}

}  // namespace tinytok::bpe
