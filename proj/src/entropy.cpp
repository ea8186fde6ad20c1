#include "tinytok/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"

namespace tinytok::entropy {

namespace {

// Compensated (Kahan) accumulator over long double.
class KahanSum {
 public:
  void add(long double x) {
    const long double y = x - comp_;
    const long double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  long double value() const { return sum_; }

 private:
  long double sum_ = 0.0L;
  long double comp_ = 0.0L;
};

}  // namespace

FrequencyDistribution build_distribution(const bpe::Tokenizer& tok,
                                         const corpus::StoryCorpus& corpus,
                                         std::size_t threads) {
  if (corpus.empty()) throw UserError("cannot build a token distribution from an empty corpus");
  std::vector<FrequencyDistribution> partials(parallel_chunk_count(corpus.size(), threads));
  parallel_chunks(corpus.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t c) {
    FrequencyDistribution local;
    for (std::size_t i = begin; i < end; ++i) {
      for (int id : tok.encode(corpus.records[i].text)) local.add(id);
    }
    partials[c] = std::move(local);
  });
  FrequencyDistribution dist;
  for (const auto& p : partials) dist.merge(p);
  return dist;
}

double renyi_entropy(const FrequencyDistribution& dist, double alpha, double log_base) {
  if (!(alpha > 0.0)) throw UserError("entropy order alpha must be positive");
  if (!(log_base > 1.0)) throw UserError("entropy log base must exceed 1");
  if (dist.total == 0) throw UserError("entropy of an empty distribution is undefined");

  const long double total = static_cast<long double>(dist.total);
  const long double log_base_l = std::log(static_cast<long double>(log_base));

  if (alpha == 1.0) {
    KahanSum sum;
    for (const auto& [id, count] : dist.counts) {
      (void)id;
      if (count == 0) continue;
      const long double p = static_cast<long double>(count) / total;
      sum.add(-p * std::log(p));
    }
    return static_cast<double>(sum.value() / log_base_l);
  }

  KahanSum sum;
  for (const auto& [id, count] : dist.counts) {
    (void)id;
    if (count == 0) continue;
    const long double p = static_cast<long double>(count) / total;
    sum.add(std::pow(p, static_cast<long double>(alpha)));
  }
  const long double log_sum = std::log(sum.value());
  return static_cast<double>(log_sum / log_base_l / (1.0L - static_cast<long double>(alpha)));
}

std::vector<std::pair<double, double>> entropy_sweep(const FrequencyDistribution& dist,
                                                     std::vector<double> alphas,
                                                     double log_base) {
  if (alphas.empty()) throw UserError("entropy sweep needs at least one alpha");
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.emplace_back(a, renyi_entropy(dist, a, log_base));
  return out;
}

}  // namespace tinytok::entropy
