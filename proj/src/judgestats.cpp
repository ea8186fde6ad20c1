#include "tinytok/judgestats.hpp"

#include <json.hpp>

#include <unordered_set>

#include "tinytok/error.hpp"

namespace tinytok::judge {

using nlohmann::json;

std::size_t metric_index(const std::string& name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (name == kMetricNames[i]) return i;
  }
  throw UserError("unknown metric \"" + name + "\" (expected one of context, completeness, "
                  "creativity, fluency, grammar, overall)");
}

std::vector<ScoreRecord> load_scores(const std::string& path, SkipReport* skips) {
  std::vector<ScoreRecord> records;
  std::unordered_set<std::string> seen_ids;
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
    ScoreRecord rec;
    auto id_it = j.find("id");
    if (id_it == j.end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
      report.add(line_no, "missing \"id\" string");
      return;
    }
    rec.id = id_it->get<std::string>();
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      auto it = j.find(kMetricNames[m]);
      if (it == j.end() || !it->is_number()) {
        report.add(line_no, std::string("missing numeric \"") + kMetricNames[m] + "\"");
        return;
      }
      const double v = it->get<double>();
      if (!(v >= 0.0 && v <= 10.0)) {
        report.add(line_no, std::string("\"") + kMetricNames[m] + "\" outside [0, 10]");
        return;
      }
      rec.values[m] = v;
    }
    if (!seen_ids.insert(rec.id).second) {
      report.add(line_no, "duplicate id: " + rec.id);
      return;
    }
    records.push_back(std::move(rec));
  });
  return records;
}

namespace {

std::vector<double> column(const std::vector<ScoreRecord>& records, std::size_t m) {
  std::vector<double> xs;
  xs.reserve(records.size());
  for (const auto& rec : records) xs.push_back(rec.values[m]);
  return xs;
}

}  // namespace

SummaryReport summarize(const std::vector<ScoreRecord>& records) {
  if (records.size() < 2) throw UserError("score summary needs at least two records");
  SummaryReport report;
  report.n = records.size();
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    const auto xs = column(records, m);
    report.metrics[kMetricNames[m]] = {stats::mean(xs), stats::median(xs), stats::sample_std(xs)};
  }
  return report;
}

CorrelationReport correlate(const std::vector<ScoreRecord>& records, const std::string& metric_a,
                            const std::string& metric_b) {
  const std::size_t a = metric_index(metric_a);
  const std::size_t b = metric_index(metric_b);
  if (a == b) throw UserError("correlation of a metric with itself is not informative");
  CorrelationReport report;
  report.metric_a = metric_a;
  report.metric_b = metric_b;
  report.pearson = stats::pearson(column(records, a), column(records, b));
  report.critical_r_001 = stats::critical_r(records.size(), 0.001);
  return report;
}

GapMatrix gap_matrix(const std::vector<ScoreRecord>& records) {
  if (records.empty()) throw UserError("gap matrix needs at least one record");
  std::array<double, 6> means{};
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    means[m] = stats::mean(column(records, m));
  }
  GapMatrix matrix;
  matrix.metrics.assign(kMetricNames.begin(), kMetricNames.end());
  matrix.gap.assign(kMetricNames.size(), std::vector<double>(kMetricNames.size(), 0.0));
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    for (std::size_t j = 0; j < kMetricNames.size(); ++j) {
      matrix.gap[i][j] = means[i] - means[j];
    }
  }
  return matrix;
}

stats::PearsonResult mean_std_correlation(const std::vector<ScoreRecord>& records) {
  if (records.size() < 2) throw UserError("mean-std correlation needs at least two records");
  std::vector<double> means, stds;
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    const auto xs = column(records, m);
    means.push_back(stats::mean(xs));
    stds.push_back(stats::sample_std(xs));
  }
  return stats::pearson(means, stds);
}

Histogram histogram(const std::vector<ScoreRecord>& records, const std::string& metric,
                    std::size_t bins) {
  if (records.empty()) throw UserError("histogram needs at least one record");
  if (bins == 0) throw UserError("histogram needs at least one bin");
  const std::size_t m = metric_index(metric);
  Histogram hist;
  hist.metric = metric;
  hist.bins.assign(bins, 0);
  const auto xs = column(records, m);
  const double width = (hist.hi - hist.lo) / static_cast<double>(bins);
  for (double x : xs) {
    std::size_t b = static_cast<std::size_t>((x - hist.lo) / width);
    if (b >= bins) b = bins - 1;  // x == hi lands in the last bin
    ++hist.bins[b];
  }
  hist.quantiles.reserve(101);
  for (int q = 0; q <= 100; ++q) {
    hist.quantiles.push_back(stats::quantile(xs, static_cast<double>(q) / 100.0));
  }
  return hist;
}

}  // namespace tinytok::judge
