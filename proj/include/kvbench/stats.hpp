#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kvbench::stats {

struct SampleSet {
  std::string label;
  std::vector<double> values;
  std::string unit;
};

enum class Degeneracy {
  kNone,
  kEqual,      // both variances zero, equal means: t = 0, p = 1
  kSeparated,  // both variances zero, different means: p = 0
};

const char* to_string(Degeneracy d);

struct TTestReport {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double var_a = 0.0;  // unbiased (n - 1) sample variances
  double var_b = 0.0;
  size_t n_a = 0;
  size_t n_b = 0;
  double standard_error = 0.0;
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  bool significant = false;
  double ci_low = 0.0;  // 95% Welch interval on mean_a - mean_b
  double ci_high = 0.0;
  Degeneracy degeneracy = Degeneracy::kNone;
};

inline constexpr double kSignificanceLevel = 0.05;
inline constexpr double kConfidenceLevel = 0.95;

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

// Regularised incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// CDF of Student's t with `df` degrees of freedom.
double t_cdf(double x, double df);

// Inverse of t_cdf by bisection, |error| <= 1e-10 in x.
double t_quantile(double p, double df);

// Two-sided Welch test of a against b.
TTestReport welch_test(const SampleSet& a, const SampleSet& b);

}  // namespace kvbench::stats
