#include "mdpmine/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mdpmine/errors.hpp"

namespace mdpmine {

namespace {

// Continued fraction for the incomplete beta function, modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double sample_mean(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = sample_mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InsufficientSamplesError("welch_t_test: need at least 2 samples per side");
  }
  const double m1 = sample_mean(a);
  const double m2 = sample_mean(b);
  const double v1 = sample_variance(a);
  const double v2 = sample_variance(b);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());

  WelchResult result;
  const double se2 = v1 / n1 + v2 / n2;
  if (se2 <= 0.0) {
    // Both samples are constant: the test degenerates; equal means are
    // trivially not significant, different means trivially are.
    result.degenerate = true;
    result.t = m1 == m2 ? 0.0 : std::numeric_limits<double>::infinity();
    result.df = n1 + n2 - 2.0;
    result.p_value = m1 == m2 ? 1.0 : 0.0;
    return result;
  }
  result.t = (m1 - m2) / std::sqrt(se2);
  const double r1 = v1 / n1;
  const double r2 = v2 / n2;
  result.df = se2 * se2 / (r1 * r1 / (n1 - 1.0) + r2 * r2 / (n2 - 1.0));
  result.p_value = student_t_two_sided_p(result.t, result.df);
  return result;
}

}  // namespace mdpmine
