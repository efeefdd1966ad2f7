#pragma once

namespace rmstop::targets {

// Jeffreys Beta(1/2,1/2) posterior mean after s successes in n Bernoulli trials.
double bernoulli_jeffreys_mean(long s, long n);

// Beta(a,b) posterior mean after k failures and no successes.
double beta_prior_all_failure_mean(double a, double b, long k);

// Jeffreys Gamma(1/2) posterior mean for a Poisson rate: Gamma(s+1/2, n+1) mean.
double poisson_jeffreys_mean(long s, long n);

// Conjugate posterior mean under a standard normal prior, known variance.
double gaussian_posterior_mean(double xbar, long n, double sigma2);

double running_mean(long s, long n);

enum class TargetKind { running_mean, jeffreys_mean };

// Reverse-coherence defect E(M_n | S_{n+1} = s_next) - M_{n+1}, evaluated via
// the exchangeable sub-sum identity E(S_n | S_{n+1}) = s_next * n / (n+1).
// Exactly zero for the running mean; O(n^-2) for the Jeffreys mean.
double exact_reverse_defect(TargetKind kind, long s_next, long n);

} // namespace rmstop::targets
