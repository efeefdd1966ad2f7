#pragma once

namespace rmstop::sf {

// Regularized incomplete beta function I_x(a,b), absolute error <= 1e-12.
double reg_inc_beta(double x, double a, double b);

// Regularized lower incomplete gamma P(s,x), absolute error <= 1e-12.
double reg_lower_gamma(double s, double x);

double norm_cdf(double z);
double norm_quantile(double p);

// Monotone inversions of the regularized CDFs. Bracketing bisection refined
// by Newton steps; round-trip |CDF(quantile(p)) - p| <= 1e-10.
double beta_quantile(double p, double a, double b);
double gamma_quantile(double p, double shape, double rate);

// Beta/Gamma CDF helpers on the (shape, rate) parameterization.
double beta_cdf(double x, double a, double b);
double gamma_cdf(double x, double shape, double rate);

} // namespace rmstop::sf
