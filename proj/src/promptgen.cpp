#include "tinytok/promptgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <unordered_set>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"
#include "tinytok/rng.hpp"
#include "tinytok/stats.hpp"
#include "tinytok/text.hpp"

namespace tinytok::promptgen {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxListSize = 9999;  // keeps 4-digit ids injective

std::vector<std::string> load_word_list(const std::string& path) {
  std::vector<std::string> words;
  for_each_line(path, [&](std::size_t, const std::string& line) {
    const std::string trimmed = text::canonical_form(line);
    if (!trimmed.empty()) words.push_back(trimmed);
  });
  return words;
}

void check_list(const std::vector<std::string>& list, const std::string& name) {
  if (list.empty()) throw UserError("lexicon list \"" + name + "\" is empty");
  if (list.size() > kMaxListSize) {
    throw UserError("lexicon list \"" + name + "\" exceeds " + std::to_string(kMaxListSize) +
                    " entries");
  }
  std::unordered_set<std::string> seen;
  for (const auto& w : list) {
    if (!seen.insert(w).second) {
      throw UserError("lexicon list \"" + name + "\" repeats entry \"" + w + "\"");
    }
  }
}

std::string pad4(std::uint32_t v) {
  std::string s = std::to_string(v);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

Lexicon load_lexicon_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  Lexicon lex;
  lex.nouns = load_word_list((root / "nouns.txt").string());
  lex.verbs = load_word_list((root / "verbs.txt").string());
  lex.adjectives = load_word_list((root / "adjectives.txt").string());

  const std::string features_path = (root / "features.json").string();
  json j = json::parse(read_file(features_path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) {
    throw UserError("features.json must be a JSON array of strings: " + features_path);
  }
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw UserError("features.json must be a JSON array of strings: " + features_path);
    }
    const std::string f = text::canonical_form(item.get<std::string>());
    if (!f.empty()) lex.features.push_back(f);
  }
  validate_lexicon(lex);
  return lex;
}

void validate_lexicon(const Lexicon& lex) {
  check_list(lex.nouns, "nouns");
  check_list(lex.verbs, "verbs");
  check_list(lex.adjectives, "adjectives");
  check_list(lex.features, "features");
}

std::string PromptKey::quad_id() const {
  return pad4(noun) + "-" + pad4(verb) + "-" + pad4(adjective) + "-" + pad4(feature);
}

std::string PromptKey::triplet_id() const {
  return pad4(noun) + "-" + pad4(verb) + "-" + pad4(adjective);
}

std::uint64_t capacity(const Lexicon& lex, UniquenessMode mode) {
  std::uint64_t cap = static_cast<std::uint64_t>(lex.nouns.size()) * lex.verbs.size() *
                      lex.adjectives.size();
  if (mode == UniquenessMode::quad) cap *= lex.features.size();
  return cap;
}

std::string render_template(const std::string& language, const std::string& noun,
                            const std::string& verb, const std::string& adjective,
                            const std::string& feature) {
  if (language.empty() || noun.empty() || verb.empty() || adjective.empty() || feature.empty()) {
    throw UserError("prompt slots must all be non-empty");
  }
  std::string out;
  out += "Write a short story in " + language + " suitable for 5-to-7-year-old children.\n\n";
  out += "Use simple, easy-to-understand words and limit the story to 3-4 short paragraphs "
         "(around 350-500 words).\n\n";
  out += "The story should feature a clear beginning, middle, and end.\n\n";
  out += "Incorporate the verb \"" + verb + "\", the noun \"" + noun + "\", and the adjective \"" +
         adjective + "\" naturally into the story.\n\n";
  out += "The story should also integrate the conclusion/tone \"" + feature +
         "\" through actions and outcomes, without directly stating the tone.\n\n";
  out += "Remember to use only simple words and keep the story appropriate for the target age "
         "group.\n\n";
  out += "Return the output as a JSON dictionary: { \"story\": \"your_generated_story\" }";
  return out;
}

PromptBatch generate(const Lexicon& lex, std::size_t target, std::uint64_t seed,
                     const std::string& language, UniquenessMode mode) {
  validate_lexicon(lex);
  if (language.empty()) throw UserError("language label must be non-empty");
  if (target == 0) throw UserError("prompt target must be positive");
  const std::uint64_t cap = capacity(lex, mode);
  if (target > cap) {
    throw UserError("target " + std::to_string(target) + " exceeds the " + std::to_string(cap) +
                    " unique combinations this lexicon supports");
  }
  const std::uint64_t max_draws = static_cast<std::uint64_t>(target) * 1000ULL;

  Rng rng(seed);
  PromptBatch batch;
  batch.prompts.reserve(target);
  std::unordered_set<std::string> used;
  used.reserve(target * 2);
  while (batch.prompts.size() < target) {
    if (batch.draws >= max_draws) {
      throw UserError("prompt sampling circuit breaker tripped after " +
                      std::to_string(batch.draws) + " draws");
    }
    ++batch.draws;
    PromptKey key;
    key.noun = static_cast<std::uint32_t>(rng.bounded(lex.nouns.size()));
    key.verb = static_cast<std::uint32_t>(rng.bounded(lex.verbs.size()));
    key.adjective = static_cast<std::uint32_t>(rng.bounded(lex.adjectives.size()));
    key.feature = static_cast<std::uint32_t>(rng.bounded(lex.features.size()));
    const std::string uniq = mode == UniquenessMode::triplet ? key.triplet_id() : key.quad_id();
    if (!used.insert(uniq).second) {
      ++batch.duplicate_count;
      continue;
    }
    GeneratedPrompt prompt;
    prompt.key = key;
    prompt.id = key.quad_id();
    prompt.text = render_template(language, lex.nouns[key.noun], lex.verbs[key.verb],
                                  lex.adjectives[key.adjective], lex.features[key.feature]);
    batch.prompts.push_back(std::move(prompt));
  }
  return batch;
}

DedupEstimate dedup_rate_estimate(const Lexicon& lex, std::size_t target, std::size_t trials,
                                  std::uint64_t seed, UniquenessMode mode) {
  validate_lexicon(lex);
  if (trials == 0) throw UserError("dedup estimate needs at least one trial");
  DedupEstimate est;
  est.trials = trials;
  est.capacity = capacity(lex, mode);
  if (target > est.capacity) {
    throw UserError("target " + std::to_string(target) + " exceeds capacity " +
                    std::to_string(est.capacity));
  }

  // E[draws to reach k unique of M] = M * sum_{j=0}^{k-1} 1/(M-j).
  long double expected_draws = 0.0L;
  const long double m = static_cast<long double>(est.capacity);
  for (std::size_t j = 0; j < target; ++j) {
    expected_draws += m / (m - static_cast<long double>(j));
  }
  est.expected_duplicates = static_cast<double>(expected_draws - static_cast<long double>(target));

  std::vector<double> dupes;
  dupes.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const PromptBatch batch = generate(lex, target, splitmix64(seed + t), "probe", mode);
    dupes.push_back(static_cast<double>(batch.duplicate_count));
  }
  est.mean_duplicates = stats::mean(dupes);
  est.stddev_duplicates = trials >= 2 ? stats::sample_std(dupes) : 0.0;
  return est;
}

}  // namespace tinytok::promptgen
