#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tinytok/io.hpp"
#include "tinytok/stats.hpp"

namespace tinytok::judge {

// The six rubric axes, in canonical report order.
inline constexpr std::array<const char*, 6> kMetricNames = {
    "context", "completeness", "creativity", "fluency", "grammar", "overall"};

std::size_t metric_index(const std::string& name);  // throws UserError on unknown names

struct ScoreRecord {
  std::string id;
  std::array<double, 6> values{};  // indexed by kMetricNames order
};

// Streams a JSONL file whose lines carry an "id" plus all six metrics as
// numbers in [0, 10].  Invalid lines are skipped and counted.
std::vector<ScoreRecord> load_scores(const std::string& path, SkipReport* skips = nullptr);

struct MetricSummary {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

struct SummaryReport {
  std::size_t n = 0;
  std::map<std::string, MetricSummary> metrics;
};

// Per-metric mean / median (midpoint) / sample std.  Needs n >= 2.
SummaryReport summarize(const std::vector<ScoreRecord>& records);

struct CorrelationReport {
  std::string metric_a;
  std::string metric_b;
  stats::PearsonResult pearson;  // r and its t statistic, df = n - 2
  double critical_r_001 = 0.0;   // significance threshold at p < .001
};

CorrelationReport correlate(const std::vector<ScoreRecord>& records, const std::string& metric_a,
                            const std::string& metric_b);

// gap[i][j] = mean(metric i) - mean(metric j); antisymmetric by construction.
struct GapMatrix {
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> gap;
};

GapMatrix gap_matrix(const std::vector<ScoreRecord>& records);

// Correlation between the six per-metric means and their standard
// deviations; the "does agreement rise with the score level" probe.
stats::PearsonResult mean_std_correlation(const std::vector<ScoreRecord>& records);

struct Histogram {
  std::string metric;
  double lo = 0.0;   // fixed 0..10 score scale
  double hi = 10.0;
  std::vector<std::uint64_t> bins;
  std::vector<double> quantiles;  // 101 values: 0%, 1%, ..., 100%
};

Histogram histogram(const std::vector<ScoreRecord>& records, const std::string& metric,
                    std::size_t bins = 20);

}  // namespace tinytok::judge
