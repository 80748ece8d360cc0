#include "kvbench/stats.hpp"

#include <cmath>
#include <limits>

#include "kvbench/error.hpp"

namespace kvbench::stats {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) return h;
  }
  return h;
}

}  // namespace

const char* to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::kNone: return "none";
    case Degeneracy::kEqual: return "degenerate-equal";
    case Degeneracy::kSeparated: return "degenerate-separated";
  }
  return "?";
}

double mean(const std::vector<double>& v) {
  if (v.empty()) invalid_parameter("mean of empty sample");
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) invalid_parameter("sample variance needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) invalid_parameter("incomplete beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) invalid_parameter("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_cdf(double x, double df) {
  if (!std::isfinite(x)) invalid_parameter("t_cdf: x must be finite");
  if (!(df > 0.0) || !std::isfinite(df)) invalid_parameter("t_cdf: df must be > 0");
  if (x == 0.0) return 0.5;
  // Lower tail mass beyond |x|: 0.5 * I_{df/(df+x^2)}(df/2, 1/2). Computing
  // z as df/(df+x^2) directly loses precision when x^2 << df, so use the
  // complementary form there.
  const double x2 = x * x;
  double tail;
  if (x2 < df) {
    const double w = x2 / (df + x2);
    tail = 0.5 * (1.0 - incomplete_beta(0.5, 0.5 * df, w));
  } else {
    tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x2));
  }
  return x < 0.0 ? tail : 1.0 - tail;
}

double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) invalid_parameter("t_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  double lo = -1.0;
  double hi = 1.0;
  while (t_cdf(lo, df) > p) lo *= 2.0;
  while (t_cdf(hi, df) < p) hi *= 2.0;
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TTestReport welch_test(const SampleSet& a, const SampleSet& b) {
  if (a.values.size() < 2 || b.values.size() < 2) {
    invalid_parameter("welch test needs at least two values per sample set");
  }
  TTestReport r;
  r.n_a = a.values.size();
  r.n_b = b.values.size();
  r.mean_a = mean(a.values);
  r.mean_b = mean(b.values);
  r.var_a = sample_variance(a.values);
  r.var_b = sample_variance(b.values);
  const double na = static_cast<double>(r.n_a);
  const double nb = static_cast<double>(r.n_b);
  const double qa = r.var_a / na;
  const double qb = r.var_b / nb;
  const double diff = r.mean_a - r.mean_b;
  r.standard_error = std::sqrt(qa + qb);

  if (r.standard_error == 0.0) {
    r.degrees_of_freedom = na + nb - 2.0;
    r.ci_low = r.ci_high = diff;
    if (diff == 0.0) {
      r.degeneracy = Degeneracy::kEqual;
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.degeneracy = Degeneracy::kSeparated;
      r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p_value = 0.0;
    }
    r.significant = r.p_value < kSignificanceLevel;
    return r;
  }

  r.t_statistic = diff / r.standard_error;
  r.degrees_of_freedom = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  r.p_value = std::min(1.0, 2.0 * t_cdf(-std::fabs(r.t_statistic), r.degrees_of_freedom));
  r.significant = r.p_value < kSignificanceLevel;
  const double crit = t_quantile(0.5 + kConfidenceLevel / 2.0, r.degrees_of_freedom);
  r.ci_low = diff - crit * r.standard_error;
  r.ci_high = diff + crit * r.standard_error;
  return r;
}

}  // namespace kvbench::stats
