// Judge-score analytics: loader hygiene, summaries, gap matrix, correlations,
// and histograms.  Reference correlation values are frozen from an
// independent statistics package.
#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tinytok/error.hpp"
#include "tinytok/judgestats.hpp"

using namespace tinytok;
using testutil::TempDir;

namespace {

judge::ScoreRecord rec(std::string id, std::array<double, 6> values) {
  judge::ScoreRecord r;
  r.id = std::move(id);
  r.values = values;
  return r;
}

// Two records {mu + d, mu - d} with d = s / sqrt(2) have mean exactly mu and
// sample std exactly s (up to rounding), so a six-metric population with
// prescribed means and stds can be built from just two rows.
std::vector<judge::ScoreRecord> two_point_records(const std::array<double, 6>& mu,
                                                  const std::array<double, 6>& sd) {
  std::array<double, 6> hi{};
  std::array<double, 6> lo{};
  for (std::size_t m = 0; m < 6; ++m) {
    const double d = sd[m] / std::sqrt(2.0);
    hi[m] = mu[m] + d;
    lo[m] = mu[m] - d;
  }
  return {rec("hi", hi), rec("lo", lo)};
}

constexpr std::array<double, 6> kMeans = {7.73, 7.78, 7.81, 8.55, 8.91, 7.79};
constexpr std::array<double, 6> kStds = {1.01, 0.86, 0.58, 0.56, 0.34, 0.52};

}  // namespace

TEST_CASE("metric_index maps the canonical order and rejects unknowns") {
  CHECK(judge::metric_index("context") == 0);
  CHECK(judge::metric_index("completeness") == 1);
  CHECK(judge::metric_index("creativity") == 2);
  CHECK(judge::metric_index("fluency") == 3);
  CHECK(judge::metric_index("grammar") == 4);
  CHECK(judge::metric_index("overall") == 5);
  CHECK_THROWS_AS(judge::metric_index("coherence"), UserError);
  CHECK_THROWS_AS(judge::metric_index(""), UserError);
}

TEST_CASE("load_scores keeps valid rows and counts every malformed line") {
  TempDir dir("judge");
  const std::string good1 =
      R"({"id":"g1","context":7.5,"completeness":8,"creativity":6.5,"fluency":9,"grammar":9.5,"overall":8})";
  const std::string good2 =
      R"({"id":"g2","context":0,"completeness":10,"creativity":5,"fluency":5,"grammar":5,"overall":5})";
  const std::string path = dir.write(
      "scores.jsonl",
      good1 + "\n" +
          "\n" +                                   // 2: empty line
          "{not json\n" +                          // 3: parse failure
          "[1,2,3]\n" +                            // 4: not an object
          R"({"context":1,"completeness":1,"creativity":1,"fluency":1,"grammar":1,"overall":1})" "\n" +  // 5: no id
          R"({"id":7,"context":1,"completeness":1,"creativity":1,"fluency":1,"grammar":1,"overall":1})" "\n" +  // 6: id not a string
          R"({"id":"","context":1,"completeness":1,"creativity":1,"fluency":1,"grammar":1,"overall":1})" "\n" +  // 7: empty id
          R"({"id":"a","context":1,"completeness":1,"creativity":1,"fluency":1,"overall":1})" "\n" +  // 8: grammar missing
          R"({"id":"b","context":1,"completeness":1,"creativity":1,"fluency":"9","grammar":1,"overall":1})" "\n" +  // 9: non-numeric
          R"({"id":"c","context":11,"completeness":1,"creativity":1,"fluency":1,"grammar":1,"overall":1})" "\n" +  // 10: > 10
          R"({"id":"d","context":-0.5,"completeness":1,"creativity":1,"fluency":1,"grammar":1,"overall":1})" "\n" +  // 11: < 0
          R"({"id":"g1","context":1,"completeness":1,"creativity":1,"fluency":1,"grammar":1,"overall":1})" "\n" +  // 12: duplicate id
          good2 + "\n");

  SkipReport skips;
  const auto records = judge::load_scores(path, &skips);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "g1");
  CHECK(records[0].values[judge::metric_index("context")] == 7.5);
  CHECK(records[0].values[judge::metric_index("grammar")] == 9.5);
  CHECK(records[1].id == "g2");
  CHECK(records[1].values[judge::metric_index("context")] == 0.0);
  CHECK(records[1].values[judge::metric_index("completeness")] == 10.0);

  CHECK(skips.skipped == 11);
  REQUIRE(skips.reasons.size() == 11);
  CHECK(skips.reasons[0].first == 2);
  CHECK(skips.reasons[0].second == "empty line");
  CHECK(skips.reasons[6].second.find("grammar") != std::string::npos);
  CHECK(skips.reasons[10].second.find("duplicate") != std::string::npos);

  CHECK_THROWS_AS(judge::load_scores(dir.file("missing.jsonl")), UserError);
}

TEST_CASE("summarize reproduces prescribed means, medians, and sample stds") {
  const auto records = two_point_records(kMeans, kStds);
  const auto summary = judge::summarize(records);
  CHECK(summary.n == 2);
  for (std::size_t m = 0; m < judge::kMetricNames.size(); ++m) {
    const auto& s = summary.metrics.at(judge::kMetricNames[m]);
    CHECK(s.mean == doctest::Approx(kMeans[m]).epsilon(1e-12));
    CHECK(s.median == doctest::Approx(kMeans[m]).epsilon(1e-12));
    CHECK(s.stddev == doctest::Approx(kStds[m]).epsilon(1e-12));
  }

  CHECK_THROWS_AS(judge::summarize({}), UserError);
  CHECK_THROWS_AS(judge::summarize({rec("only", {1, 2, 3, 4, 5, 6})}), UserError);
}

TEST_CASE("gap matrix matches the two-decimal differences of the means") {
  const auto records = two_point_records(kMeans, kStds);
  const auto matrix = judge::gap_matrix(records);
  REQUIRE(matrix.metrics.size() == 6);
  REQUIRE(matrix.gap.size() == 6);

  const auto gap = [&](const char* a, const char* b) {
    return matrix.gap[judge::metric_index(a)][judge::metric_index(b)];
  };
  CHECK(gap("grammar", "context") == doctest::Approx(1.18).epsilon(1e-12));
  CHECK(gap("grammar", "completeness") == doctest::Approx(1.13).epsilon(1e-12));
  CHECK(gap("grammar", "creativity") == doctest::Approx(1.10).epsilon(1e-12));
  CHECK(gap("grammar", "fluency") == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(gap("fluency", "context") == doctest::Approx(0.82).epsilon(1e-12));
  CHECK(gap("fluency", "completeness") == doctest::Approx(0.77).epsilon(1e-12));
  CHECK(gap("fluency", "creativity") == doctest::Approx(0.74).epsilon(1e-12));
  CHECK(gap("context", "completeness") == doctest::Approx(-0.05).epsilon(1e-12));

  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(matrix.gap[i][i] == 0.0);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(matrix.gap[i][j] == -matrix.gap[j][i]);  // exact in IEEE arithmetic
    }
  }

  CHECK_THROWS_AS(judge::gap_matrix({}), UserError);
}

TEST_CASE("mean-std correlation matches the frozen reference value") {
  const auto records = two_point_records(kMeans, kStds);
  const auto result = judge::mean_std_correlation(records);
  // pearsonr over means {7.73,...} and stds {1.01,...}, n = 6 metrics.
  CHECK(result.r == doctest::Approx(-0.6974924770961384).epsilon(1e-9));
  CHECK(result.t == doctest::Approx(-1.94669316785848).epsilon(1e-8));
  CHECK(result.n == 6);  // df = n - 2 = 4

  CHECK_THROWS_AS(judge::mean_std_correlation({rec("x", {1, 2, 3, 4, 5, 6})}), UserError);
}

TEST_CASE("correlate matches a frozen Pearson oracle and reports the threshold") {
  const std::vector<double> xs = {7.5, 8.0, 6.5, 9.0, 7.0, 8.5, 7.8, 8.2};
  const std::vector<double> ys = {7.0, 8.5, 6.0, 9.5, 6.8, 8.8, 7.5, 8.0};
  std::vector<judge::ScoreRecord> records;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    records.push_back(rec("r" + std::to_string(i), {xs[i], 5.0, 5.0, 5.0, 5.0, ys[i]}));
  }

  const auto report = judge::correlate(records, "context", "overall");
  CHECK(report.metric_a == "context");
  CHECK(report.metric_b == "overall");
  CHECK(report.pearson.r == doctest::Approx(0.9712422034494659).epsilon(1e-12));
  CHECK(report.pearson.t == doctest::Approx(9.992067817047102).epsilon(1e-10));
  CHECK(report.pearson.n == 8);  // df = n - 2 = 6
  CHECK(report.critical_r_001 == doctest::Approx(0.9249041986562664).epsilon(1e-7));

  CHECK_THROWS_AS(judge::correlate(records, "overall", "overall"), UserError);
  CHECK_THROWS_AS(judge::correlate(records, "context", "vibes"), UserError);
  // Constant column -> zero variance inside pearson.
  CHECK_THROWS_AS(judge::correlate(records, "context", "grammar"), UserError);
}

TEST_CASE("histogram bins on the fixed 0..10 scale and reports 101 quantiles") {
  std::vector<judge::ScoreRecord> records;
  const std::vector<double> values = {0.0, 0.5, 5.0, 9.99, 10.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    records.push_back(rec("h" + std::to_string(i), {5, 5, 5, 5, 5, values[i]}));
  }

  const auto hist = judge::histogram(records, "overall", 20);
  CHECK(hist.metric == "overall");
  CHECK(hist.lo == 0.0);
  CHECK(hist.hi == 10.0);
  REQUIRE(hist.bins.size() == 20);
  CHECK(hist.bins[0] == 1);   // 0.0
  CHECK(hist.bins[1] == 1);   // 0.5 sits on the left edge of bin 1
  CHECK(hist.bins[10] == 1);  // 5.0
  CHECK(hist.bins[19] == 2);  // 9.99 plus 10.0 clamped into the last bin
  std::uint64_t total = 0;
  for (auto b : hist.bins) total += b;
  CHECK(total == values.size());

  REQUIRE(hist.quantiles.size() == 101);
  CHECK(hist.quantiles.front() == 0.0);
  CHECK(hist.quantiles.back() == 10.0);
  CHECK(hist.quantiles[50] == doctest::Approx(5.0));
  for (std::size_t q = 1; q < hist.quantiles.size(); ++q) {
    CHECK(hist.quantiles[q] >= hist.quantiles[q - 1]);
  }

  CHECK_THROWS_AS(judge::histogram({}, "overall", 20), UserError);
  CHECK_THROWS_AS(judge::histogram(records, "overall", 0), UserError);
  CHECK_THROWS_AS(judge::histogram(records, "sparkle", 20), UserError);
}
