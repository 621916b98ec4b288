#pragma once

#include <cstddef>

namespace zonedet {

/// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
/// continued fraction otherwise.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed on the
/// branch that avoids cancellation.
double regularized_gamma_q(double a, double x);

/// Central chi-squared CDF with (real) dof degrees of freedom.
double chi2_cdf(double x, double dof);

/// Inverse of chi2_cdf in x for integer dof >= 1. Bisection to ~1e-12
/// relative accuracy.
double chi2_quantile(double p, int dof);

/// Non-central chi-squared CDF: Poisson mixture of central CDFs, expanded
/// outward from the Poisson mode, truncated when the unvisited Poisson mass
/// drops below 1e-12.
double noncentral_chi2_cdf(double x, double dof, double noncentrality);

/// Generalized Marcum Q-function Q_m(a, b) for real order m >= 0.5, defined
/// through the non-central chi-squared survival function
/// Q_m(a, b) = P[chi2'_{2m}(a^2) > b^2]. Half-integer orders come for free.
double marcum_q(double order, double a, double b);

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double regularized_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace zonedet
