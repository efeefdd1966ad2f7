#pragma once

namespace rmstop {

struct IntervalWidth {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
};

// Equal-tailed Beta(s+1/2, n-s+1/2) credible interval (Jeffreys prior).
IntervalWidth jeffreys_beta_width(long s, long n, double alpha);

// Equal-tailed Gamma(s+1/2, rate n+1) credible interval (Jeffreys prior).
IntervalWidth jeffreys_gamma_width(long s, long n, double alpha);

// Continuous-shape variants used by the series monitor (fractional totals).
IntervalWidth beta_interval(double a, double b, double alpha);
IntervalWidth gamma_interval(double shape, double rate, double alpha);

// Deterministic conjugate-normal credible width 2 z_{alpha/2} / sqrt(n/sigma2 + 1).
double gaussian_width(long n, double sigma2, double alpha);

// Clopper-Pearson upper bound after n failures and zero successes: 1 - alpha^(1/n).
double clopper_pearson_upper_zero(long n, double alpha);

// Minimal all-failure run length: ceil(log(alpha) / log(1 - epsilon)).
long all_failure_threshold(double alpha, double epsilon);

} // namespace rmstop
