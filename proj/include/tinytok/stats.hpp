#pragma once

#include <cstddef>
#include <vector>

namespace tinytok::stats {

double mean(const std::vector<double>& xs);     // error on empty input
double median(std::vector<double> xs);          // midpoint convention, error on empty
double sample_std(const std::vector<double>& xs);  // n-1 denominator, needs n >= 2

// Linear-interpolation quantile (the convention whose q=0.5 equals the
// midpoint median).  q in [0, 1].
double quantile(std::vector<double> xs, double q);

struct PearsonResult {
  double r = 0.0;
  double t = 0.0;  // r * sqrt(n-2) / sqrt(1-r^2); +/-inf when |r| == 1
  std::size_t n = 0;
};

// Pearson correlation with its t statistic (df = n-2).  Errors: length
// mismatch, n < 3, zero variance on either side.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta function I_x(a, b), evaluated with the Lentz
// continued fraction.  Exposed so tests can probe it directly.
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

// Two-tailed critical value: the t* with P(|T| > t*) == p, found by
// bisection on the CDF (no external special-function library).
double student_t_critical(double p_two_tailed, double df);

// Significance threshold for a correlation of n paired samples at the given
// two-tailed level:  r* = t* / sqrt(t*^2 + n - 2).
double critical_r(std::size_t n, double p_two_tailed);

}  // namespace tinytok::stats
