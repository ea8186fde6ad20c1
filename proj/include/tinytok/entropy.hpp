#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tinytok/corpus.hpp"
#include "tinytok/tokenizer.hpp"

namespace tinytok::entropy {

// Token-id frequency counts over a corpus.  Only ids that actually occur
// are held, so every stored count is positive.
struct FrequencyDistribution {
  std::unordered_map<int, std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t observed_vocab() const { return counts.size(); }

  void add(int id, std::uint64_t n = 1) {
    counts[id] += n;
    total += n;
  }

  void merge(const FrequencyDistribution& other) {
    for (const auto& [id, c] : other.counts) counts[id] += c;
    total += other.total;
  }
};

FrequencyDistribution build_distribution(const bpe::Tokenizer& tok,
                                         const corpus::StoryCorpus& corpus,
                                         std::size_t threads = 1);

// Renyi entropy of order alpha:
//   H_alpha = log(sum_i p_i^alpha) / (1 - alpha),   alpha != 1
//   H_1     = -sum_i p_i log p_i                    (Shannon limit)
// in units of log_base (bits by default).  Summation is compensated
// (Kahan) over long double accumulators, zero-probability ids excluded.
// alpha must be positive and the distribution non-empty.
double renyi_entropy(const FrequencyDistribution& dist, double alpha, double log_base = 2.0);

// Evaluates a set of orders; the result is sorted ascending by alpha with
// duplicate orders collapsed.
std::vector<std::pair<double, double>> entropy_sweep(const FrequencyDistribution& dist,
                                                     std::vector<double> alphas,
                                                     double log_base = 2.0);

}  // namespace tinytok::entropy
