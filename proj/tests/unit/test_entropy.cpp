#include <doctest.h>

#include <cmath>
#include <random>

#include "tinytok/entropy.hpp"
#include "tinytok/error.hpp"
#include "test_util.hpp"

using namespace tinytok;

namespace {

entropy::FrequencyDistribution from_counts(const std::vector<std::uint64_t>& counts) {
  entropy::FrequencyDistribution d;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) d.add(static_cast<int>(i), counts[i]);
  }
  return d;
}

}  // namespace

TEST_CASE("uniform distribution has entropy log2(N) at every order") {
  const std::size_t n = 1024;
  entropy::FrequencyDistribution d;
  for (std::size_t i = 0; i < n; ++i) d.add(static_cast<int>(i), 3);
  for (double alpha : {0.5, 1.0, 2.0, 2.5}) {
    CHECK(entropy::renyi_entropy(d, alpha) == doctest::Approx(10.0).epsilon(1e-13));
  }
}

TEST_CASE("frozen entropies of a small fixed distribution") {
  // frozen against a direct numpy evaluation of the definition
  const auto d = from_counts({5, 3, 2, 7, 1, 1, 1});
  CHECK(entropy::renyi_entropy(d, 0.5) == doctest::Approx(2.6042923283207164).epsilon(1e-12));
  CHECK(entropy::renyi_entropy(d, 1.0) == doctest::Approx(2.421127473337187).epsilon(1e-12));
  CHECK(entropy::renyi_entropy(d, 2.0) == doctest::Approx(2.15200309344505).epsilon(1e-12));
  CHECK(entropy::renyi_entropy(d, 2.5) == doctest::Approx(2.061350810260345).epsilon(1e-12));
  CHECK(entropy::renyi_entropy(d, 3.0) == doctest::Approx(1.9913953549838885).epsilon(1e-12));
}

TEST_CASE("changing the log base rescales the result") {
  const auto d = from_counts({5, 3, 2, 7, 1, 1, 1});
  const double bits = entropy::renyi_entropy(d, 2.0, 2.0);
  const double nats = entropy::renyi_entropy(d, 2.0, std::exp(1.0));
  CHECK(nats == doctest::Approx(bits * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy is non-increasing in alpha") {
  std::mt19937_64 rng(23);
  const double alphas[] = {0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0, 5.0};
  for (int iter = 0; iter < 100; ++iter) {
    entropy::FrequencyDistribution d;
    const std::size_t support = 2 + rng() % 200;
    for (std::size_t i = 0; i < support; ++i) d.add(static_cast<int>(i), 1 + rng() % 1000);
    double prev = std::numeric_limits<double>::infinity();
    for (double a : alphas) {
      const double h = entropy::renyi_entropy(d, a);
      CHECK(h <= prev + 1e-9);
      prev = h;
    }
  }
}

TEST_CASE("shannon limit is continuous at alpha = 1") {
  std::mt19937_64 rng(29);
  for (int iter = 0; iter < 50; ++iter) {
    entropy::FrequencyDistribution d;
    const std::size_t support = 2 + rng() % 500;
    for (std::size_t i = 0; i < support; ++i) d.add(static_cast<int>(i), 1 + rng() % 5000);
    const double h1 = entropy::renyi_entropy(d, 1.0);
    CHECK(std::fabs(entropy::renyi_entropy(d, 1.0 + 1e-4) - h1) < 1e-3);
    CHECK(std::fabs(entropy::renyi_entropy(d, 1.0 - 1e-4) - h1) < 1e-3);
  }
}

TEST_CASE("degenerate single-token distribution has zero entropy") {
  const auto d = from_counts({42});
  for (double a : {0.5, 1.0, 2.0}) {
    CHECK(entropy::renyi_entropy(d, a) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("invalid parameters are rejected") {
  const auto d = from_counts({1, 2, 3});
  CHECK_THROWS_AS(entropy::renyi_entropy(d, 0.0), UserError);
  CHECK_THROWS_AS(entropy::renyi_entropy(d, -1.0), UserError);
  CHECK_THROWS_AS(entropy::renyi_entropy(d, 2.0, 1.0), UserError);
  CHECK_THROWS_AS(entropy::renyi_entropy(entropy::FrequencyDistribution{}, 2.0), UserError);
}

TEST_CASE("entropy_sweep sorts and dedupes orders") {
  const auto d = from_counts({4, 4, 4, 4});
  const auto sweep = entropy::entropy_sweep(d, {2.0, 0.5, 2.0, 1.0});
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].first == 0.5);
  CHECK(sweep[1].first == 1.0);
  CHECK(sweep[2].first == 2.0);
  for (const auto& [a, h] : sweep) CHECK(h == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("build_distribution counts token occurrences over a corpus") {
  const auto tok = testutil::make_tokenizer(testutil::ascii_alphabet(), {{"a", "b"}});
  corpus::StoryCorpus c;
  c.records.push_back({"one", "ab ab", corpus::Split::unsplit, {}});
  c.records.push_back({"two", "ba", corpus::Split::unsplit, {}});
  const auto d = entropy::build_distribution(tok, c);
  // tokens: ab, ' ', ab | b, a
  CHECK(d.total == 5);
  CHECK(d.observed_vocab() == 4);
  CHECK(d.counts.at(tok.vocab.at("ab")) == 2);
  CHECK(d.counts.at(tok.vocab.at("a")) == 1);
  CHECK(d.counts.at(tok.vocab.at("b")) == 1);

  // chunked and sequential runs agree
  const auto d4 = entropy::build_distribution(tok, c, 4);
  CHECK(d4.total == d.total);
  CHECK(d4.counts == d.counts);
}
