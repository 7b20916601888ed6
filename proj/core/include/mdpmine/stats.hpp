#pragma once

#include <span>

namespace mdpmine {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (Lentz). Accurate to ~1e-12 for the parameter ranges used by
/// the t-test.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  ///< both variances zero; p forced to 0 or 1
};

/// Welch's unequal-variance two-sample t-test. Requires two samples per
/// side; throws InsufficientSamplesError otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  ///< Bessel-corrected

}  // namespace mdpmine
