#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tinytok::spectral {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Reads either a CSV of numeric rows (path ending in .csv) or the binary
// layout: one JSON header line {"rows": R, "cols": C, "dtype": "f32"}
// followed by exactly R*C little-endian float32 values.  Dimension
// mismatches and non-finite entries are errors.
Matrix load_matrix(const std::string& path);

void save_matrix_binary(const std::string& path, const Matrix& m);
void save_matrix_csv(const std::string& path, const Matrix& m);

// Singular values in descending order via one-sided Jacobi rotations on the
// tall orientation (all accumulation in double).  Hand-rolled so results do
// not depend on an external linear-algebra library.
std::vector<double> singular_values(const Matrix& m);

// Empirical spectral distribution: the squared singular values, descending.
std::vector<double> esd(const Matrix& m);

// Largest singular value by power iteration on A^T A; an independent check
// on the Jacobi path.
double power_iteration_sigma_max(const Matrix& m, std::size_t iterations = 300,
                                 std::uint64_t seed = 1);

struct PowerlawOptions {
  // Pin lambda_min instead of scanning; the tail is then every eigenvalue
  // >= this value.
  std::optional<double> fixed_lambda_min;
  std::size_t min_tail = 10;  // smallest tail a fit may use
};

struct PowerlawFit {
  double alpha = 0.0;       // MLE exponent: 1 + n / sum(ln(x / lambda_min))
  double lambda_min = 0.0;  // chosen (or pinned) tail cutoff
  double ks = 0.0;          // KS distance between tail and fitted CDF
  std::size_t tail_n = 0;
};

// Continuous power-law fit in the Clauset style: every distinct eigenvalue
// is a lambda_min candidate, alpha comes from the MLE closed form, and the
// candidate minimizing the KS distance wins (ties -> smaller lambda_min).
// Errors: no candidate leaves a big-enough tail, or the tail is degenerate
// (all values equal).
PowerlawFit fit_powerlaw(std::vector<double> lambdas, const PowerlawOptions& options = {});

// sum(sigma^2) / sigma_max^2 in [1, min(rows, cols)]; 0 for a zero matrix.
double stable_rank(const std::vector<double>& sigma);

// Shannon entropy of the normalized eigenvalue mass, divided by ln(m) where
// m counts positive eigenvalues, so the value lands in [0, 1] (0 when a
// single eigenvalue carries everything, 1 when the mass is uniform).
double esd_entropy(const std::vector<double>& lambdas);

// Exponents above this band mark a layer whose spectrum decays too fast --
// the signature of an under-trained layer; [2, 6] is the healthy range.
inline constexpr double kAlphaHealthyLow = 2.0;
inline constexpr double kAlphaHealthyHigh = 6.0;

struct LayerReport {
  std::string layer;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double spectral_norm = 0.0;
  double stable_rank = 0.0;
  double esd_entropy = 0.0;
  // Absent when the spectrum cannot support a fit (tiny or degenerate tail);
  // the norms above are still meaningful then.
  std::optional<PowerlawFit> fit;
  bool under_trained = false;  // fit && alpha > kAlphaHealthyHigh
};

LayerReport analyze_layer(const std::string& name, const Matrix& m,
                          const PowerlawOptions& options = {});

struct ModelReport {
  std::vector<LayerReport> layers;  // sorted by layer name
  std::size_t under_trained_count = 0;
  // Aggregates over layers that produced a fit (alpha) or all layers (rest).
  double mean_alpha = 0.0;
  double min_alpha = 0.0;
  double max_alpha = 0.0;
  double mean_entropy = 0.0;
  double mean_spectral_norm = 0.0;
  double mean_stable_rank = 0.0;
};

// Runs every layer in a {"layers": {name: file, ...}} manifest (or a bare
// name->file object); relative paths resolve against the manifest location.
ModelReport analyze_manifest(const std::string& manifest_path,
                             const PowerlawOptions& options = {});

// CSV rows: layer,alpha,lambda_min,spectral_norm,stable_rank,entropy,under_trained
// (alpha and lambda_min empty when no fit was possible).
std::string report_csv(const ModelReport& report);

}  // namespace tinytok::spectral
