#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tinytok/corpus.hpp"

namespace tinytok::diversity {

// NFC-normalize then split on Unicode whitespace.
std::vector<std::string> word_tokens(std::string_view text);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// N-gram overlap with clipped counts (each reference n-gram credits at most
// its own multiplicity).
RougeScore rouge_n(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   std::size_t n);

// Longest-common-subsequence variant; f1 uses the F_beta weighting (beta = 1
// weights precision and recall equally).
RougeScore rouge_l(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   double beta = 1.0);

struct BleuOptions {
  int max_order = 4;
  enum class Smoothing { none, epsilon } smoothing = Smoothing::none;
  double epsilon = 0.1;  // replaces zero clipped counts when smoothing == epsilon
};

// Sentence BLEU: geometric mean of clipped n-gram precisions over the orders
// the candidate can populate, times the brevity penalty
// exp(1 - |ref|/|cand|) when the candidate is shorter.
double bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
            const BleuOptions& options = {});

struct MeteorOptions {
  double gamma = 0.5;  // fragmentation penalty weight
  double beta = 3.0;   // fragmentation penalty exponent
  // Words match when their keys are equal; identity gives the exact stage.
  // Swapping in a stemmer or similar normalizer extends the matcher without
  // touching the alignment search.
  std::function<std::string(const std::string&)> word_key;
  // Chunk minimization is a branch-and-bound search (minimizing chunks over
  // maximal matchings is NP-hard in general); beyond this many nodes the
  // best alignment found so far is kept.
  std::size_t node_cap = 200000;
};

// Unigram matcher with the harmonic mean weighted 9:1 towards recall
// (F = 10PR / (R + 9P)) and fragmentation penalty
// gamma * (chunks / matches)^beta.
double meteor(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
              const MeteorOptions& options = {});

// Exposed for testing: maximum match count and the minimum number of chunks
// any maximal alignment can achieve.
std::pair<std::size_t, std::size_t> meteor_alignment(const std::vector<std::string>& cand,
                                                     const std::vector<std::string>& ref,
                                                     const MeteorOptions& options = {});

struct PairScores {
  RougeScore rouge1, rouge2, rougeL;
  double bleu = 0.0;
  double meteor = 0.0;
};

PairScores score_pair(std::string_view cand_text, std::string_view ref_text,
                      const BleuOptions& bleu_options = {},
                      const MeteorOptions& meteor_options = {});

enum class Pairing { random_sample, all_ordered };

struct DiversityOptions {
  Pairing pairing = Pairing::random_sample;
  std::size_t sample_size = 10;  // ordered (candidate, reference) pairs when sampling
  std::uint64_t seed = 0;
  BleuOptions bleu;
  MeteorOptions meteor;
};

struct PairRow {
  std::string cand_id;
  std::string ref_id;
  PairScores scores;
};

inline const std::vector<std::string> kMetricNames = {"rouge1", "rouge2", "rougeL", "bleu",
                                                      "meteor"};

struct DiversityReport {
  std::vector<PairRow> pairs;
  std::map<std::string, double> mean;    // keyed by kMetricNames (rouge = F1)
  std::map<std::string, double> stddev;  // sample std; 0 when fewer than 2 pairs
  // Pearson correlations between the five metric columns; entries are empty
  // when a column is constant (e.g. all-zero ROUGE-2 on disjoint stories).
  std::vector<std::vector<std::optional<double>>> correlation;
};

// Cross-story similarity study: scores sampled ordered pairs of distinct
// stories.  Deterministic for a fixed seed.  Errors: fewer than two stories,
// sample size exceeding n*(n-1).
DiversityReport diversity_report(const corpus::StoryCorpus& corpus,
                                 const DiversityOptions& options, std::size_t threads = 1);

}  // namespace tinytok::diversity
