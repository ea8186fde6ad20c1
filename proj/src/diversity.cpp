#include "tinytok/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "tinytok/error.hpp"
#include "tinytok/rng.hpp"
#include "tinytok/stats.hpp"
#include "tinytok/text.hpp"

namespace tinytok::diversity {

std::vector<std::string> word_tokens(std::string_view text_in) {
  return text::split_whitespace(text::nfc(text_in));
}

namespace {

// Tokens contain no whitespace, so joining with a space is injective.
std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& toks,
                                                          std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (n == 0 || toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += ' ';
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t clipped_overlap(const std::unordered_map<std::string, std::size_t>& cand,
                            const std::unordered_map<std::string, std::size_t>& ref) {
  std::size_t overlap = 0;
  for (const auto& [key, count] : cand) {
    auto it = ref.find(key);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

RougeScore rouge_n(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   std::size_t n) {
  if (n == 0) throw UserError("rouge order must be positive");
  RougeScore score;
  const auto cand_counts = ngram_counts(cand, n);
  const auto ref_counts = ngram_counts(ref, n);
  const std::size_t cand_total = cand.size() >= n ? cand.size() - n + 1 : 0;
  const std::size_t ref_total = ref.size() >= n ? ref.size() - n + 1 : 0;
  if (cand_total == 0 || ref_total == 0) return score;
  const std::size_t overlap = clipped_overlap(cand_counts, ref_counts);
  score.precision = static_cast<double>(overlap) / static_cast<double>(cand_total);
  score.recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
  if (score.precision + score.recall > 0.0) {
    score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
  }
  return score;
}

RougeScore rouge_l(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   double beta) {
  RougeScore score;
  if (cand.empty() || ref.empty()) return score;
  const double lcs = static_cast<double>(lcs_length(cand, ref));
  score.precision = lcs / static_cast<double>(cand.size());
  score.recall = lcs / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  const double denom = score.recall + b2 * score.precision;
  if (denom > 0.0) {
    score.f1 = (1.0 + b2) * score.precision * score.recall / denom;
  }
  return score;
}

double bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
            const BleuOptions& options) {
  if (options.max_order < 1) throw UserError("bleu max order must be at least 1");
  if (options.smoothing == BleuOptions::Smoothing::epsilon && !(options.epsilon > 0.0)) {
    throw UserError("bleu epsilon smoothing needs a positive epsilon");
  }
  if (cand.empty() || ref.empty()) return 0.0;

  // Only orders the candidate can populate enter the geometric mean, so an
  // exact copy shorter than max_order still scores 1.
  double log_sum = 0.0;
  int orders_used = 0;
  for (int n = 1; n <= options.max_order; ++n) {
    const std::size_t total = cand.size() >= static_cast<std::size_t>(n)
                                  ? cand.size() - static_cast<std::size_t>(n) + 1
                                  : 0;
    if (total == 0) break;
    const auto cand_counts = ngram_counts(cand, static_cast<std::size_t>(n));
    const auto ref_counts = ngram_counts(ref, static_cast<std::size_t>(n));
    const std::size_t overlap = clipped_overlap(cand_counts, ref_counts);
    double p = static_cast<double>(overlap) / static_cast<double>(total);
    if (p == 0.0) {
      if (options.smoothing == BleuOptions::Smoothing::none) return 0.0;
      p = options.epsilon / static_cast<double>(total);
    }
    log_sum += std::log(p);
    ++orders_used;
  }
  if (orders_used == 0) return 0.0;

  double brevity = 1.0;
  if (cand.size() < ref.size()) {
    brevity = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
  }
  return brevity * std::exp(log_sum / orders_used);
}

namespace {

// Branch-and-bound search for the fewest chunks over all alignments that
// realize the maximum match count.  Candidate positions are processed left
// to right; at each matchable position the continuation of the current run
// is tried first so the incumbent converges quickly, and any partial
// solution whose chunk count already reaches the incumbent is cut.
class ChunkSearch {
 public:
  ChunkSearch(const std::vector<std::string>& cand_keys, const std::vector<std::string>& ref_keys,
              std::size_t node_cap)
      : cand_(cand_keys), node_cap_(node_cap) {
    for (std::size_t j = 0; j < ref_keys.size(); ++j) ref_pos_[ref_keys[j]].push_back(j);
    std::unordered_map<std::string, std::size_t> cand_counts;
    for (const auto& w : cand_keys) ++cand_counts[w];
    for (const auto& [w, c] : cand_counts) {
      auto it = ref_pos_.find(w);
      if (it != ref_pos_.end()) quota_[w] = std::min(c, it->second.size());
    }
    for (const auto& [w, q] : quota_) total_matches_ += q;
    // Suffix counts let a branch know whether skipping this occurrence still
    // leaves enough later ones to fill the quota.
    suffix_.assign(cand_.size(), 0);
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = cand_.size(); i-- > 0;) {
      suffix_[i] = ++seen[cand_[i]];
    }
    used_ref_.assign(ref_keys.size(), false);
  }

  std::pair<std::size_t, std::size_t> run() {
    if (total_matches_ == 0) return {0, 0};
    dfs(0, /*last_ref=*/-2, /*cand_adjacent=*/false, /*chunks=*/0, total_matches_);
    return {total_matches_, best_chunks_};
  }

 private:
  void dfs(std::size_t ci, std::ptrdiff_t last_ref, bool cand_adjacent, std::size_t chunks,
           std::size_t remaining) {
    if (remaining == 0) {
      best_chunks_ = std::min(best_chunks_, chunks);
      return;
    }
    // Chunk counts only grow, so a partial solution at the incumbent's count
    // cannot beat it.
    if (chunks >= best_chunks_) return;
    if (++nodes_ > node_cap_) greedy_ = true;

    // Advance to the next candidate position that could still match.
    while (ci < cand_.size()) {
      auto it = quota_.find(cand_[ci]);
      if (it != quota_.end() && it->second > 0) break;
      ++ci;
      cand_adjacent = false;
    }
    if (ci >= cand_.size()) return;  // quotas unfilled on this path: dead end
    auto q = quota_.find(cand_[ci]);

    // The ref position that would extend the current chunk is tried first so
    // the incumbent converges to few-chunk alignments quickly.
    std::vector<std::size_t> refs;
    const auto& positions = ref_pos_[cand_[ci]];
    const std::size_t cont = cand_adjacent && last_ref >= 0
                                 ? static_cast<std::size_t>(last_ref + 1)
                                 : SIZE_MAX;
    if (cont != SIZE_MAX && std::binary_search(positions.begin(), positions.end(), cont) &&
        !used_ref_[cont]) {
      refs.push_back(cont);
    }
    for (std::size_t j : positions) {
      if (!used_ref_[j] && j != cont) refs.push_back(j);
    }
    for (std::size_t j : refs) {
      const bool continues = cand_adjacent && static_cast<std::ptrdiff_t>(j) == last_ref + 1;
      used_ref_[j] = true;
      --q->second;
      dfs(ci + 1, static_cast<std::ptrdiff_t>(j), true, chunks + (continues ? 0 : 1),
          remaining - 1);
      ++q->second;
      used_ref_[j] = false;
      // Past the node budget: stop branching as soon as any alignment exists.
      if (greedy_ && best_chunks_ != SIZE_MAX) return;
    }

    // Leaving this occurrence unmatched is allowed only when later
    // occurrences can still fill the quota.
    if (suffix_[ci] - 1 >= q->second) {
      dfs(ci + 1, last_ref, false, chunks, remaining);
    }
  }

  const std::vector<std::string>& cand_;
  std::unordered_map<std::string, std::vector<std::size_t>> ref_pos_;
  std::unordered_map<std::string, std::size_t> quota_;
  std::vector<std::size_t> suffix_;
  std::vector<bool> used_ref_;
  std::size_t total_matches_ = 0;
  std::size_t best_chunks_ = SIZE_MAX;
  std::size_t nodes_ = 0;
  std::size_t node_cap_;
  bool greedy_ = false;
};

std::vector<std::string> apply_key(const std::vector<std::string>& words,
                                   const std::function<std::string(const std::string&)>& key) {
  if (!key) return words;
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(key(w));
  return out;
}

}  // namespace

std::pair<std::size_t, std::size_t> meteor_alignment(const std::vector<std::string>& cand,
                                                     const std::vector<std::string>& ref,
                                                     const MeteorOptions& options) {
  const auto cand_keys = apply_key(cand, options.word_key);
  const auto ref_keys = apply_key(ref, options.word_key);
  ChunkSearch search(cand_keys, ref_keys, options.node_cap);
  return search.run();
}

double meteor(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
              const MeteorOptions& options) {
  if (cand.empty() || ref.empty()) return 0.0;
  const auto [matches, chunks] = meteor_alignment(cand, ref, options);
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(cand.size());
  const double recall = m / static_cast<double>(ref.size());
  const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double frag = static_cast<double>(chunks) / m;
  const double penalty = options.gamma * std::pow(frag, options.beta);
  return f_mean * (1.0 - penalty);
}

PairScores score_pair(std::string_view cand_text, std::string_view ref_text,
                      const BleuOptions& bleu_options, const MeteorOptions& meteor_options) {
  const auto cand = word_tokens(cand_text);
  const auto ref = word_tokens(ref_text);
  PairScores scores;
  scores.rouge1 = rouge_n(cand, ref, 1);
  scores.rouge2 = rouge_n(cand, ref, 2);
  scores.rougeL = rouge_l(cand, ref);
  scores.bleu = bleu(cand, ref, bleu_options);
  scores.meteor = meteor(cand, ref, meteor_options);
  return scores;
}

DiversityReport diversity_report(const corpus::StoryCorpus& corpus,
                                 const DiversityOptions& options, std::size_t threads) {
  const std::size_t n = corpus.size();
  if (n < 2) throw UserError("diversity needs at least two stories");
  const std::size_t all_pairs = n * (n - 1);

  std::vector<std::pair<std::size_t, std::size_t>> picks;
  if (options.pairing == Pairing::all_ordered) {
    picks.reserve(all_pairs);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) picks.emplace_back(i, j);
      }
    }
  } else {
    if (options.sample_size == 0) throw UserError("pair sample size must be positive");
    if (options.sample_size > all_pairs) {
      throw UserError("pair sample size exceeds the " + std::to_string(all_pairs) +
                      " available ordered pairs");
    }
    Rng rng(options.seed);
    std::unordered_set<std::uint64_t> chosen;
    while (picks.size() < options.sample_size) {
      const std::uint64_t k = rng.bounded(all_pairs);
      if (!chosen.insert(k).second) continue;
      const std::size_t i = static_cast<std::size_t>(k / (n - 1));
      std::size_t j = static_cast<std::size_t>(k % (n - 1));
      if (j >= i) ++j;
      picks.emplace_back(i, j);
    }
  }

  DiversityReport report;
  report.pairs.resize(picks.size());
  parallel_chunks(picks.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto [i, j] = picks[k];
      PairRow row;
      row.cand_id = corpus.records[i].id;
      row.ref_id = corpus.records[j].id;
      row.scores = score_pair(corpus.records[i].text, corpus.records[j].text, options.bleu,
                              options.meteor);
      report.pairs[k] = std::move(row);
    }
  });

  std::vector<std::vector<double>> columns(kMetricNames.size());
  for (const PairRow& row : report.pairs) {
    columns[0].push_back(row.scores.rouge1.f1);
    columns[1].push_back(row.scores.rouge2.f1);
    columns[2].push_back(row.scores.rougeL.f1);
    columns[3].push_back(row.scores.bleu);
    columns[4].push_back(row.scores.meteor);
  }
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    report.mean[kMetricNames[m]] = stats::mean(columns[m]);
    report.stddev[kMetricNames[m]] =
        columns[m].size() >= 2 ? stats::sample_std(columns[m]) : 0.0;
  }
  report.correlation.assign(kMetricNames.size(),
                            std::vector<std::optional<double>>(kMetricNames.size()));
  for (std::size_t a = 0; a < kMetricNames.size(); ++a) {
    for (std::size_t b = 0; b < kMetricNames.size(); ++b) {
      if (a == b) {
        report.correlation[a][b] = 1.0;
        continue;
      }
      try {
        report.correlation[a][b] = stats::pearson(columns[a], columns[b]).r;
      } catch (const UserError&) {
        report.correlation[a][b] = std::nullopt;  // constant column or too few pairs
      }
    }
  }
  return report;
}

}  // namespace tinytok::diversity
