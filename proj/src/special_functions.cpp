#include "rmstop/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rmstop::sf {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kCfEps = 1e-16;
constexpr int kCfMaxIter = 500;

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kCfEps) return h;
    }
    throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

// Lower incomplete gamma by series (valid for x < s + 1). Near x ~ s the
// terms decay like exp(-k^2/(2s)), so the budget scales with sqrt(s).
double gamma_series(double s, double x) {
    const int max_iter = kCfMaxIter + static_cast<int>(12.0 * std::sqrt(s));
    double ap = s;
    double sum = 1.0 / s;
    double del = sum;
    for (int k = 0; k < max_iter; ++k) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kCfEps) {
            return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
        }
    }
    throw std::runtime_error("reg_lower_gamma: series did not converge");
}

// Upper incomplete gamma Q(s,x) by continued fraction (valid for x >= s + 1).
double gamma_cf_upper(double s, double x) {
    double b = x + 1.0 - s;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kCfMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kCfEps) {
            return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
        }
    }
    throw std::runtime_error("reg_lower_gamma: continued fraction did not converge");
}

struct Bracket {
    double lo, hi;
};

// Bisection-safeguarded Newton for a monotone CDF; cdf and log_pdf share x.
template <typename Cdf, typename LogPdf>
double invert_cdf(double p, Bracket br, double x0, Cdf cdf, LogPdf log_pdf,
                  const char* what) {
    double x = x0;
    if (!(x > br.lo && x < br.hi)) x = 0.5 * (br.lo + br.hi);
    double err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = cdf(x);
        err = f - p;
        if (std::fabs(err) <= 1e-14) return x;
        if (err > 0.0) br.hi = x;
        else br.lo = x;
        double xn = x - err * std::exp(-log_pdf(x));
        if (!std::isfinite(xn) || xn <= br.lo || xn >= br.hi) {
            xn = 0.5 * (br.lo + br.hi);
        }
        if (xn == x) break;
        x = xn;
    }
    if (std::fabs(cdf(x) - p) > 1e-10) {
        throw std::runtime_error(std::string(what) + ": quantile iteration did not converge");
    }
    return x;
}

} // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reg_inc_beta: shapes must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("reg_inc_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double reg_lower_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("reg_lower_gamma: shape must be positive");
    if (!(x >= 0.0)) throw std::domain_error("reg_lower_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return gamma_series(s, x);
    return 1.0 - gamma_cf_upper(s, x);
}

double beta_cdf(double x, double a, double b) { return reg_inc_beta(x, a, b); }

double gamma_cdf(double x, double shape, double rate) {
    if (!(rate > 0.0)) throw std::domain_error("gamma_cdf: rate must be positive");
    return reg_lower_gamma(shape, rate * x);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p outside (0,1)");
    // Acklam's rational approximation, then one Halley step against erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double beta_quantile(double p, double a, double b) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("beta_quantile: p outside (0,1)");
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_quantile: shapes must be positive");
    if (p > 0.5) {
        // Upper-tail quantiles can sit within a few ulps of 1; invert the
        // mirrored lower-tail problem, which keeps full relative precision.
        return 1.0 - beta_quantile(1.0 - p, b, a);
    }
    const double lbeta = log_beta(a, b);
    return invert_cdf(
        p, Bracket{0.0, 1.0}, std::min(a / (a + b), 0.5),
        [&](double x) { return reg_inc_beta(x, a, b); },
        [&](double x) { return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta; },
        "beta_quantile");
}

double gamma_quantile(double p, double shape, double rate) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gamma_quantile: p outside (0,1)");
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::domain_error("gamma_quantile: shape and rate must be positive");
    }
    // Solve on the unit-rate scale, then divide.
    double hi = shape + 10.0 * std::sqrt(shape) + 10.0;
    while (reg_lower_gamma(shape, hi) < p) {
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("gamma_quantile: bracket expansion failed");
    }
    const double lg = std::lgamma(shape);
    const double y = invert_cdf(
        p, Bracket{0.0, hi}, shape,
        [&](double x) { return reg_lower_gamma(shape, x); },
        [&](double x) { return (shape - 1.0) * std::log(x) - x - lg; },
        "gamma_quantile");
    return y / rate;
}

} // namespace rmstop::sf
