#include "rmstop/uncertainty.hpp"

#include "rmstop/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rmstop {

namespace {

void check_alpha(double alpha, const char* what) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error(std::string(what) + ": alpha outside (0,1)");
    }
}

} // namespace

IntervalWidth beta_interval(double a, double b, double alpha) {
    check_alpha(alpha, "beta_interval");
    return {sf::beta_quantile(alpha / 2.0, a, b), sf::beta_quantile(1.0 - alpha / 2.0, a, b)};
}

IntervalWidth gamma_interval(double shape, double rate, double alpha) {
    check_alpha(alpha, "gamma_interval");
    return {sf::gamma_quantile(alpha / 2.0, shape, rate),
            sf::gamma_quantile(1.0 - alpha / 2.0, shape, rate)};
}

IntervalWidth jeffreys_beta_width(long s, long n, double alpha) {
    if (n < 0 || s < 0 || s > n) throw std::domain_error("jeffreys_beta_width: need 0 <= s <= n");
    return beta_interval(static_cast<double>(s) + 0.5, static_cast<double>(n - s) + 0.5, alpha);
}

IntervalWidth jeffreys_gamma_width(long s, long n, double alpha) {
    if (n < 1) throw std::domain_error("jeffreys_gamma_width: n must be >= 1");
    if (s < 0) throw std::domain_error("jeffreys_gamma_width: s must be nonnegative");
    return gamma_interval(static_cast<double>(s) + 0.5, static_cast<double>(n) + 1.0, alpha);
}

double gaussian_width(long n, double sigma2, double alpha) {
    if (n < 0) throw std::domain_error("gaussian_width: n must be nonnegative");
    if (!(sigma2 > 0.0)) throw std::domain_error("gaussian_width: sigma2 must be positive");
    check_alpha(alpha, "gaussian_width");
    const double z = sf::norm_quantile(1.0 - alpha / 2.0);
    return 2.0 * z / std::sqrt(static_cast<double>(n) / sigma2 + 1.0);
}

double clopper_pearson_upper_zero(long n, double alpha) {
    if (n < 1) throw std::domain_error("clopper_pearson_upper_zero: n must be >= 1");
    check_alpha(alpha, "clopper_pearson_upper_zero");
    return -std::expm1(std::log(alpha) / static_cast<double>(n));
}

long all_failure_threshold(double alpha, double epsilon) {
    check_alpha(alpha, "all_failure_threshold");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::domain_error("all_failure_threshold: epsilon outside (0,1)");
    }
    const double la = std::log(alpha);
    const double l1me = std::log1p(-epsilon);
    long n = static_cast<long>(std::ceil(la / l1me));
    if (n < 1) n = 1;
    // Guard the ceil against ties: n qualifies iff n*log(1-eps) <= log(alpha).
    while (n > 1 && static_cast<double>(n - 1) * l1me <= la) --n;
    while (static_cast<double>(n) * l1me > la) ++n;
    return n;
}

} // namespace rmstop
