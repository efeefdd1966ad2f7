#include "rmstop/quasi_rm.hpp"

#include "rmstop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rmstop {

namespace {

constexpr std::uint64_t kStreamY = 0x59u; // observation stream tag
constexpr std::uint64_t kStreamZ = 0x5Au; // latent-heterogeneity stream tag

double expit(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

void check_spec(double p_base, long n_max) {
    if (!(p_base > 0.0 && p_base < 1.0)) throw std::invalid_argument("scenario: p_base outside (0,1)");
    if (n_max < 1) throw std::invalid_argument("scenario: n_max must be >= 1");
}

} // namespace

std::vector<std::int8_t> bernoulli_path(double p, long n_max, std::uint64_t seed) {
    check_spec(p, n_max);
    Rng rng(derive_seed(seed, kStreamY));
    std::vector<std::int8_t> y(static_cast<std::size_t>(n_max));
    for (long i = 0; i < n_max; ++i) y[i] = rng.bernoulli(p) ? 1 : 0;
    return y;
}

TargetPath scenario_a(double p_base, double sigma, long n_max, std::uint64_t seed) {
    check_spec(p_base, n_max);
    if (!(sigma >= 0.0)) throw std::invalid_argument("scenario_a: sigma must be nonnegative");
    TargetPath path;
    path.m.resize(static_cast<std::size_t>(n_max));
    path.y.resize(static_cast<std::size_t>(n_max));
    Rng yrng(derive_seed(seed, kStreamY));
    Rng zrng(derive_seed(seed, kStreamZ));
    const double base_logit = std::log(p_base / (1.0 - p_base));
    long s = 0;
    for (long i = 0; i < n_max; ++i) {
        const double p = sigma == 0.0 ? p_base : expit(base_logit + sigma * zrng.normal());
        const std::int8_t yi = yrng.bernoulli(p) ? 1 : 0;
        s += yi;
        path.y[i] = yi;
        path.m[i] = static_cast<double>(s) / static_cast<double>(i + 1);
    }
    return path;
}

TargetPath scenario_b(double p_base, double gamma, long n_max, std::uint64_t seed) {
    check_spec(p_base, n_max);
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("scenario_b: gamma outside (0,1]");
    TargetPath path;
    path.y = bernoulli_path(p_base, n_max, seed);
    path.m.resize(static_cast<std::size_t>(n_max));
    if (gamma == 1.0) {
        // a_n = 1/n makes the recursion the running mean; keep it exact.
        long s = 0;
        for (long i = 0; i < n_max; ++i) {
            s += path.y[i];
            path.m[i] = static_cast<double>(s) / static_cast<double>(i + 1);
        }
        return path;
    }
    double m = static_cast<double>(path.y[0]); // a_1 = 1 for every gamma
    path.m[0] = m;
    for (long i = 1; i < n_max; ++i) {
        const double a = std::pow(static_cast<double>(i + 1), -gamma);
        m = a * static_cast<double>(path.y[i]) + (1.0 - a) * m;
        path.m[i] = m;
    }
    return path;
}

TargetPath scenario_c(double p_base, double kappa, long n_max, std::uint64_t seed) {
    check_spec(p_base, n_max);
    if (!(kappa >= 0.0)) throw std::invalid_argument("scenario_c: kappa must be nonnegative");
    TargetPath path;
    path.y = bernoulli_path(p_base, n_max, seed);
    path.m.resize(static_cast<std::size_t>(n_max));
    const double a0 = 0.5;
    const double b0 = 0.5;
    double a = a0;
    double b = b0;
    for (long i = 0; i < n_max; ++i) {
        const double lam = kappa / (static_cast<double>(i + 1) + kappa);
        const double yi = static_cast<double>(path.y[i]);
        a = (1.0 - lam) * (a - a0) + a0 + yi;
        b = (1.0 - lam) * (b - b0) + b0 + (1.0 - yi);
        path.m[i] = a / (a + b);
    }
    return path;
}

std::vector<double> scenario_a_path(double p_base, double sigma, long n_max, std::uint64_t seed) {
    return scenario_a(p_base, sigma, n_max, seed).m;
}
std::vector<double> scenario_b_path(double p_base, double gamma, long n_max, std::uint64_t seed) {
    return scenario_b(p_base, gamma, n_max, seed).m;
}
std::vector<double> scenario_c_path(double p_base, double kappa, long n_max, std::uint64_t seed) {
    return scenario_c(p_base, kappa, n_max, seed).m;
}

std::vector<double> defect_summary(const std::vector<std::vector<double>>& m_paths,
                                   std::span<const long> checkpoints) {
    if (m_paths.empty()) throw std::invalid_argument("defect_summary: no paths");
    std::vector<double> medians;
    medians.reserve(checkpoints.size());
    std::vector<double> defects(m_paths.size());
    for (long cp : checkpoints) {
        if (cp < 2) throw std::invalid_argument("defect_summary: checkpoints must be >= 2");
        for (std::size_t j = 0; j < m_paths.size(); ++j) {
            const auto& m = m_paths[j];
            if (cp > static_cast<long>(m.size())) {
                throw std::invalid_argument("defect_summary: checkpoint beyond path length");
            }
            defects[j] = std::fabs(m[cp - 1] - m[cp - 2]);
        }
        std::sort(defects.begin(), defects.end());
        const std::size_t k = defects.size();
        medians.push_back(k % 2 == 1 ? defects[k / 2]
                                     : 0.5 * (defects[k / 2 - 1] + defects[k / 2]));
    }
    return medians;
}

} // namespace rmstop
