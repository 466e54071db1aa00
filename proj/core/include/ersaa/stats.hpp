#pragma once

#include <cstddef>

namespace ersaa::stats {

double normal_cdf(double x);

/// Inverse standard normal CDF, tau in (0, 1).
double normal_quantile(double tau);

/// Regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of the Student t distribution with dof degrees of freedom.
double student_t_cdf(double t, double dof);

/// Quantile of the Student t distribution scaled to unit variance (dof > 2).
double student_t_unit_variance_quantile(double tau, double dof);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for a binomial proportion at 95% coverage.
Interval wilson_interval(std::size_t successes, std::size_t trials);

} // namespace ersaa::stats
