#include "rmstop/targets.hpp"

#include <stdexcept>

namespace rmstop::targets {

double bernoulli_jeffreys_mean(long s, long n) {
    if (n < 0 || s < 0 || s > n) {
        throw std::domain_error("bernoulli_jeffreys_mean: need 0 <= s <= n");
    }
    return (static_cast<double>(s) + 0.5) / (static_cast<double>(n) + 1.0);
}

double beta_prior_all_failure_mean(double a, double b, long k) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("beta_prior_all_failure_mean: prior shapes must be positive");
    }
    if (k < 0) throw std::domain_error("beta_prior_all_failure_mean: k must be nonnegative");
    return a / (a + b + static_cast<double>(k));
}

double poisson_jeffreys_mean(long s, long n) {
    if (n < 1) throw std::domain_error("poisson_jeffreys_mean: n must be >= 1");
    if (s < 0) throw std::domain_error("poisson_jeffreys_mean: s must be nonnegative");
    return (static_cast<double>(s) + 0.5) / (static_cast<double>(n) + 1.0);
}

double gaussian_posterior_mean(double xbar, long n, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::domain_error("gaussian_posterior_mean: sigma2 must be positive");
    if (n < 0) throw std::domain_error("gaussian_posterior_mean: n must be nonnegative");
    if (n == 0) return 0.0;
    const double dn = static_cast<double>(n);
    return (dn * xbar / sigma2) / (dn / sigma2 + 1.0);
}

double running_mean(long s, long n) {
    if (n < 1) throw std::domain_error("running_mean: n must be >= 1");
    return static_cast<double>(s) / static_cast<double>(n);
}

double exact_reverse_defect(TargetKind kind, long s_next, long n) {
    if (n < 1) throw std::domain_error("exact_reverse_defect: n must be >= 1");
    if (s_next < 0 || s_next > n + 1) {
        throw std::domain_error("exact_reverse_defect: need 0 <= s_next <= n+1");
    }
    const double dn = static_cast<double>(n);
    const double ds = static_cast<double>(s_next);
    // E(S_n | S_{n+1} = s_next) = s_next * n / (n+1); both products below are
    // exact integers, so each quotient is a single correctly rounded division.
    const double cond_sum = ds * dn;
    switch (kind) {
    case TargetKind::running_mean: {
        const double cond_mean = cond_sum / ((dn + 1.0) * dn); // = s_next/(n+1) exactly
        const double next_mean = ds / (dn + 1.0);
        return cond_mean - next_mean;
    }
    case TargetKind::jeffreys_mean: {
        const double cond_mean = (cond_sum / (dn + 1.0) + 0.5) / (dn + 1.0);
        const double next_mean = (ds + 0.5) / (dn + 2.0);
        return cond_mean - next_mean;
    }
    }
    throw std::domain_error("exact_reverse_defect: unknown target kind");
}

} // namespace rmstop::targets
