#pragma once

namespace moodsense {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_lower_gamma(double a, double x);

/// Two-tailed p-value of Student's t with `dof` degrees of freedom.
double student_t_two_tailed_p(double t, double dof);

/// Chi-square CDF with `dof` degrees of freedom.
double chi2_cdf(int dof, double x);

/// Inverse chi-square CDF by bisection on chi2_cdf, converged to 1e-12
/// relative. Throws INVALID_PROBABILITY unless 0 < q < 1, and INVALID_DOF
/// for dof < 1.
double chi2_quantile(int dof, double q);

}  // namespace moodsense
