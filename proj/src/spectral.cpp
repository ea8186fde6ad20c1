#include "tinytok/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"
#include "tinytok/rng.hpp"

namespace tinytok::spectral {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "the f32 matrix format assumes a little-endian host");

namespace {

void check_finite(const Matrix& m, const std::string& path) {
  for (double v : m.values) {
    if (!std::isfinite(v)) throw UserError("matrix has a non-finite entry: " + path);
  }
}

Matrix load_csv(const std::string& path) {
  Matrix m;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (line.empty()) return;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw UserError("bad numeric cell at line " + std::to_string(line_no) + ": " + path);
      }
    }
    if (row.empty()) {
      throw UserError("empty CSV row at line " + std::to_string(line_no) + ": " + path);
    }
    if (m.cols == 0) {
      m.cols = row.size();
    } else if (row.size() != m.cols) {
      throw UserError("ragged CSV row at line " + std::to_string(line_no) + ": " + path);
    }
    ++m.rows;
    m.values.insert(m.values.end(), row.begin(), row.end());
  });
  if (m.rows == 0) throw UserError("matrix file is empty: " + path);
  return m;
}

Matrix load_binary(const std::string& path) {
  const std::string blob = read_file(path);
  const std::size_t newline = blob.find('\n');
  if (newline == std::string::npos) {
    throw UserError("matrix file lacks the JSON header line: " + path);
  }
  json header = json::parse(blob.substr(0, newline), nullptr, /*allow_exceptions=*/false);
  if (header.is_discarded() || !header.is_object() || !header.contains("rows") ||
      !header.contains("cols") || !header["rows"].is_number_unsigned() ||
      !header["cols"].is_number_unsigned()) {
    throw UserError("invalid matrix header: " + path);
  }
  if (header.value("dtype", "") != "f32") {
    throw UserError("matrix dtype must be \"f32\": " + path);
  }
  Matrix m;
  m.rows = header["rows"].get<std::size_t>();
  m.cols = header["cols"].get<std::size_t>();
  if (m.rows == 0 || m.cols == 0) throw UserError("matrix dimensions must be positive: " + path);
  const std::size_t count = m.rows * m.cols;
  const std::size_t payload = blob.size() - newline - 1;
  if (payload != count * sizeof(float)) {
    throw UserError("matrix payload is " + std::to_string(payload) + " bytes, expected " +
                    std::to_string(count * sizeof(float)) + ": " + path);
  }
  m.values.resize(count);
  const char* bytes = blob.data() + newline + 1;
  for (std::size_t i = 0; i < count; ++i) {
    float v;
    std::memcpy(&v, bytes + i * sizeof(float), sizeof(float));
    m.values[i] = static_cast<double>(v);
  }
  return m;
}

}  // namespace

Matrix load_matrix(const std::string& path) {
  Matrix m = std::filesystem::path(path).extension() == ".csv" ? load_csv(path)
                                                               : load_binary(path);
  check_finite(m, path);
  return m;
}

void save_matrix_binary(const std::string& path, const Matrix& m) {
  json header;
  header["rows"] = m.rows;
  header["cols"] = m.cols;
  header["dtype"] = "f32";
  std::string blob = header.dump();
  blob.push_back('\n');
  blob.reserve(blob.size() + m.values.size() * sizeof(float));
  for (double v : m.values) {
    const float f = static_cast<float>(v);
    const char* p = reinterpret_cast<const char*>(&f);
    blob.append(p, sizeof(float));
  }
  write_file(path, blob);
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out << ',';
      out << m.at(r, c);
    }
    out << '\n';
  }
  write_file(path, out.str());
}

std::vector<double> singular_values(const Matrix& m) {
  if (m.rows == 0 || m.cols == 0 || m.values.size() != m.rows * m.cols) {
    throw UserError("singular values need a non-empty, consistent matrix");
  }
  // Work on the tall orientation: columns of the m x n factor (m >= n) are
  // rotated pairwise until mutually orthogonal; their norms are the singular
  // values (the rotations are right-multiplications by orthogonal matrices,
  // which leave singular values untouched).
  const bool tall = m.rows >= m.cols;
  const std::size_t nr = tall ? m.rows : m.cols;
  const std::size_t nc = tall ? m.cols : m.rows;
  std::vector<std::vector<double>> col(nc, std::vector<double>(nr));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (tall) {
        col[c][r] = m.at(r, c);
      } else {
        col[r][c] = m.at(r, c);
      }
    }
  }

  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < nc; ++i) {
      for (std::size_t j = i + 1; j < nc; ++j) {
        double a = 0.0, b = 0.0, g = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
          a += col[i][r] * col[i][r];
          b += col[j][r] * col[j][r];
          g += col[i][r] * col[j][r];
        }
        if (g == 0.0 || std::fabs(g) <= kTol * std::sqrt(a * b)) continue;
        const double zeta = (b - a) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < nr; ++r) {
          const double vi = col[i][r];
          const double vj = col[j][r];
          col[i][r] = c * vi - s * vj;
          col[j][r] = s * vi + c * vj;
        }
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double ss = 0.0;
    for (double v : col[c]) ss += v * v;
    sigma[c] = std::sqrt(ss);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

std::vector<double> esd(const Matrix& m) {
  std::vector<double> lambdas = singular_values(m);
  for (double& v : lambdas) v = v * v;
  return lambdas;
}

double power_iteration_sigma_max(const Matrix& m, std::size_t iterations, std::uint64_t seed) {
  if (m.rows == 0 || m.cols == 0) throw UserError("power iteration needs a non-empty matrix");
  Rng rng(seed);
  std::vector<double> v(m.cols);
  for (double& x : v) x = rng.normal();
  std::vector<double> u(m.rows);
  double sigma = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < m.cols; ++c) acc += m.at(r, c) * v[c];
      u[r] = acc;
    }
    double un = 0.0;
    for (double x : u) un += x * x;
    un = std::sqrt(un);
    if (un == 0.0) return 0.0;  // landed in the null space; norm is 0 for zero A
    for (std::size_t c = 0; c < m.cols; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < m.rows; ++r) acc += m.at(r, c) * u[r];
      v[c] = acc;
    }
    double vn = 0.0;
    for (double x : v) vn += x * x;
    vn = std::sqrt(vn);
    if (vn == 0.0) return 0.0;
    for (double& x : v) x /= vn;
    sigma = vn / un;
  }
  return sigma;
}

PowerlawFit fit_powerlaw(std::vector<double> lambdas, const PowerlawOptions& options) {
  std::erase_if(lambdas, [](double v) { return !(v > 0.0); });
  std::sort(lambdas.begin(), lambdas.end());
  if (options.min_tail < 2) throw UserError("power-law fits need a tail of at least 2");
  if (lambdas.size() < options.min_tail) {
    throw UserError("spectrum has " + std::to_string(lambdas.size()) +
                    " positive eigenvalues; a fit needs at least " +
                    std::to_string(options.min_tail));
  }

  // Evaluates the MLE fit for one cutoff; the tail is lambdas[first..end).
  auto evaluate = [&](std::size_t first, double lambda_min) -> std::optional<PowerlawFit> {
    const std::size_t n = lambdas.size() - first;
    if (n < options.min_tail) return std::nullopt;
    double log_sum = 0.0;
    for (std::size_t i = first; i < lambdas.size(); ++i) {
      log_sum += std::log(lambdas[i] / lambda_min);
    }
    if (!(log_sum > 0.0)) return std::nullopt;  // all tail values equal: degenerate
    PowerlawFit fit;
    fit.lambda_min = lambda_min;
    fit.tail_n = n;
    fit.alpha = 1.0 + static_cast<double>(n) / log_sum;
    // Two-sided KS against F(x) = 1 - (lambda_min / x)^(alpha-1): the
    // empirical CDF steps from i/n to (i+1)/n at each sorted tail point.
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double model = 1.0 - std::pow(lambda_min / lambdas[first + i], fit.alpha - 1.0);
      const double lo = static_cast<double>(i) / static_cast<double>(n);
      const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
      ks = std::max({ks, std::fabs(model - lo), std::fabs(hi - model)});
    }
    fit.ks = ks;
    return fit;
  };

  if (options.fixed_lambda_min) {
    const double cutoff = *options.fixed_lambda_min;
    if (!(cutoff > 0.0)) throw UserError("lambda_min must be positive");
    const std::size_t first = static_cast<std::size_t>(
        std::lower_bound(lambdas.begin(), lambdas.end(), cutoff) - lambdas.begin());
    auto fit = evaluate(first, cutoff);
    if (!fit) {
      throw UserError("tail above the pinned lambda_min is too small or degenerate");
    }
    return *fit;
  }

  std::optional<PowerlawFit> best;
  for (std::size_t first = 0; first < lambdas.size(); ++first) {
    if (first > 0 && lambdas[first] == lambdas[first - 1]) continue;  // same candidate
    auto fit = evaluate(first, lambdas[first]);
    if (!fit) continue;
    if (!best || fit->ks < best->ks ||
        (fit->ks == best->ks && fit->lambda_min < best->lambda_min)) {
      best = fit;
    }
  }
  if (!best) throw UserError("no lambda_min candidate leaves a usable tail");
  return *best;
}

double stable_rank(const std::vector<double>& sigma) {
  double sum = 0.0;
  double top = 0.0;
  for (double s : sigma) {
    sum += s * s;
    top = std::max(top, s * s);
  }
  if (top == 0.0) return 0.0;
  return sum / top;
}

double esd_entropy(const std::vector<double>& lambdas) {
  double total = 0.0;
  std::size_t positive = 0;
  for (double v : lambdas) {
    if (v > 0.0) {
      total += v;
      ++positive;
    }
  }
  if (positive <= 1 || total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : lambdas) {
    if (v <= 0.0) continue;
    const double p = v / total;
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(positive));
}

LayerReport analyze_layer(const std::string& name, const Matrix& m,
                          const PowerlawOptions& options) {
  LayerReport report;
  report.layer = name;
  report.rows = m.rows;
  report.cols = m.cols;
  const std::vector<double> sigma = singular_values(m);
  std::vector<double> lambdas(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) lambdas[i] = sigma[i] * sigma[i];
  report.spectral_norm = sigma.empty() ? 0.0 : sigma.front();
  report.stable_rank = stable_rank(sigma);
  report.esd_entropy = esd_entropy(lambdas);
  try {
    report.fit = fit_powerlaw(lambdas, options);
    report.under_trained = report.fit->alpha > kAlphaHealthyHigh;
  } catch (const UserError&) {
    report.fit = std::nullopt;  // norms above still stand
  }
  return report;
}

ModelReport analyze_manifest(const std::string& manifest_path, const PowerlawOptions& options) {
  json j = json::parse(read_file(manifest_path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw UserError("invalid model manifest: " + manifest_path);
  }
  const json& layers = j.contains("layers") ? j["layers"] : j;
  if (!layers.is_object() || layers.empty()) {
    throw UserError("manifest needs a non-empty layer map: " + manifest_path);
  }
  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();

  std::map<std::string, std::string> files;  // sorted by layer name
  for (const auto& [name, value] : layers.items()) {
    if (!value.is_string()) {
      throw UserError("layer \"" + name + "\" must map to a file path: " + manifest_path);
    }
    std::filesystem::path p(value.get<std::string>());
    if (p.is_relative()) p = base / p;
    files[name] = p.string();
  }

  ModelReport report;
  double alpha_sum = 0.0;
  std::size_t alpha_n = 0;
  double entropy_sum = 0.0, norm_sum = 0.0, rank_sum = 0.0;
  for (const auto& [name, file] : files) {
    LayerReport layer = analyze_layer(name, load_matrix(file), options);
    if (layer.fit) {
      alpha_sum += layer.fit->alpha;
      ++alpha_n;
      if (alpha_n == 1) {
        report.min_alpha = report.max_alpha = layer.fit->alpha;
      } else {
        report.min_alpha = std::min(report.min_alpha, layer.fit->alpha);
        report.max_alpha = std::max(report.max_alpha, layer.fit->alpha);
      }
    }
    if (layer.under_trained) ++report.under_trained_count;
    entropy_sum += layer.esd_entropy;
    norm_sum += layer.spectral_norm;
    rank_sum += layer.stable_rank;
    report.layers.push_back(std::move(layer));
  }
  const double n = static_cast<double>(report.layers.size());
  report.mean_alpha = alpha_n ? alpha_sum / static_cast<double>(alpha_n) : 0.0;
  report.mean_entropy = entropy_sum / n;
  report.mean_spectral_norm = norm_sum / n;
  report.mean_stable_rank = rank_sum / n;
  return report;
}

std::string report_csv(const ModelReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "layer,alpha,lambda_min,spectral_norm,stable_rank,entropy,under_trained\n";
  for (const LayerReport& layer : report.layers) {
    out << layer.layer << ',';
    if (layer.fit) {
      out << layer.fit->alpha << ',' << layer.fit->lambda_min << ',';
    } else {
      out << ",,";
    }
    out << layer.spectral_norm << ',' << layer.stable_rank << ',' << layer.esd_entropy << ','
        << (layer.under_trained ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace tinytok::spectral
