#include "rmstop/benchmarks.hpp"

#include "rmstop/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <algorithm>

namespace rmstop {

double SprtConfig::lower() const { return std::log(beta / (1.0 - alpha)); }
double SprtConfig::upper() const { return std::log((1.0 - beta) / alpha); }

void SprtConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("SprtConfig: alpha and beta must lie in (0,1)");
    }
    if (!(p0 > 0.0 && p0 < 1.0) || !(p1 > 0.0 && p1 < 1.0)) {
        throw std::invalid_argument("SprtConfig: p0 and p1 must lie in (0,1)");
    }
    if (p0 == p1) throw std::invalid_argument("SprtConfig: degenerate config, p0 == p1");
    if (!(p1 < p0)) throw std::invalid_argument("SprtConfig: requires p1 < p0");
    if (!(lower() < 0.0 && upper() > 0.0)) {
        throw std::invalid_argument("SprtConfig: boundaries must satisfy a < 0 < b");
    }
}

StopReport sprt_bernoulli_run(std::span<const int> path, const SprtConfig& cfg, long n_max) {
    cfg.validate();
    StopReport report;
    report.rule = Rule::sprt;
    const double inc1 = std::log(cfg.p1 / cfg.p0);               // per success, < 0
    const double inc0 = std::log((1.0 - cfg.p1) / (1.0 - cfg.p0)); // per failure, > 0
    const double a = cfg.lower();
    const double b = cfg.upper();
    double llr = 0.0;
    const long horizon = std::min<long>(n_max, static_cast<long>(path.size()));
    for (long n = 1; n <= horizon; ++n) {
        llr += path[n - 1] ? inc1 : inc0;
        if (llr >= b) {
            report.stopped = true;
            report.tau = n;
            report.m_at_tau = llr;
            return report;
        }
        if (llr <= a) return report; // H0 accepted: censored with reason
    }
    return report;
}

long sprt_all_failure_time(const SprtConfig& cfg) {
    cfg.validate();
    const double b = cfg.upper();
    const double inc = std::log((1.0 - cfg.p1) / (1.0 - cfg.p0));
    long n = static_cast<long>(std::ceil(b / inc));
    if (n < 1) n = 1;
    while (n > 1 && static_cast<double>(n - 1) * inc >= b) --n;
    while (static_cast<double>(n) * inc < b) ++n;
    return n;
}

StopReport sprt_poisson_run(std::span<const long> path, double lambda0, double lambda1,
                            double alpha, double beta, long n_max) {
    if (!(lambda0 > 0.0) || !(lambda1 > 0.0)) {
        throw std::invalid_argument("sprt_poisson_run: rates must be positive");
    }
    if (lambda0 == lambda1) throw std::invalid_argument("sprt_poisson_run: degenerate config");
    if (!(lambda1 < lambda0)) throw std::invalid_argument("sprt_poisson_run: requires lambda1 < lambda0");
    StopReport report;
    report.rule = Rule::sprt;
    const double log_ratio = std::log(lambda1 / lambda0);
    const double drift = lambda1 - lambda0;
    const double a = std::log(beta / (1.0 - alpha));
    const double b = std::log((1.0 - beta) / alpha);
    double llr = 0.0;
    const long horizon = std::min<long>(n_max, static_cast<long>(path.size()));
    for (long n = 1; n <= horizon; ++n) {
        llr += static_cast<double>(path[n - 1]) * log_ratio - drift;
        if (llr >= b) {
            report.stopped = true;
            report.tau = n;
            report.m_at_tau = llr;
            return report;
        }
        if (llr <= a) return report;
    }
    return report;
}

StopReport cusum_normal_run(std::span<const double> path, double k, double h, long n_max) {
    if (!(h > 0.0)) throw std::invalid_argument("cusum_normal_run: h must be positive");
    StopReport report;
    report.rule = Rule::cusum;
    double s = 0.0;
    const long horizon = std::min<long>(n_max, static_cast<long>(path.size()));
    for (long n = 1; n <= horizon; ++n) {
        s = std::max(0.0, s + path[n - 1] - k);
        if (s > h) {
            report.stopped = true;
            report.tau = n;
            report.m_at_tau = s;
            return report;
        }
    }
    return report;
}

StopReport cusum_poisson_run(std::span<const long> path, double lambda0, double lambda1,
                             double h, long n_max) {
    if (!(lambda0 > 0.0) || !(lambda1 > lambda0)) {
        throw std::invalid_argument("cusum_poisson_run: requires lambda1 > lambda0 > 0");
    }
    if (!(h > 0.0)) throw std::invalid_argument("cusum_poisson_run: h must be positive");
    StopReport report;
    report.rule = Rule::cusum;
    const double log_ratio = std::log(lambda1 / lambda0);
    const double drift = lambda1 - lambda0;
    double s = 0.0;
    const long horizon = std::min<long>(n_max, static_cast<long>(path.size()));
    for (long n = 1; n <= horizon; ++n) {
        s = std::max(0.0, s + static_cast<double>(path[n - 1]) * log_ratio - drift);
        if (s > h) {
            report.stopped = true;
            report.tau = n;
            report.m_at_tau = s;
            return report;
        }
    }
    return report;
}

namespace {

// In-control run length for a candidate threshold, one run per seed stream.
long cusum_run_length(const CusumModel& model, double h, long cap, Rng& rng) {
    double s = 0.0;
    for (long n = 1; n <= cap; ++n) {
        double inc;
        if (model.kind == CusumModel::Kind::normal) {
            inc = rng.normal() - model.k;
        } else {
            inc = static_cast<double>(rng.poisson(model.lambda0)) *
                      std::log(model.lambda1 / model.lambda0) -
                  (model.lambda1 - model.lambda0);
        }
        s = std::max(0.0, s + inc);
        if (s > h) return n;
    }
    return cap; // censored at the cap
}

} // namespace

CalibrationResult calibrate_cusum_threshold(const CusumModel& model, double target_arl0,
                                            long mc_runs, std::uint64_t seed) {
    if (!(target_arl0 > 1.0)) {
        throw std::invalid_argument("calibrate_cusum_threshold: target_arl0 must exceed 1");
    }
    if (mc_runs < 1) throw std::invalid_argument("calibrate_cusum_threshold: mc_runs must be >= 1");
    if (model.kind == CusumModel::Kind::poisson &&
        (!(model.lambda0 > 0.0) || !(model.lambda1 > model.lambda0))) {
        throw std::invalid_argument("calibrate_cusum_threshold: requires lambda1 > lambda0 > 0");
    }
    const long cap = static_cast<long>(50.0 * target_arl0);

    CalibrationResult result;
    result.mc_runs = mc_runs;
    std::vector<long> lengths(static_cast<std::size_t>(mc_runs));
    auto estimate = [&](double h) {
        // Common random numbers: run j always replays seed stream j, so the
        // estimate is nondecreasing in h and independent of thread count.
#pragma omp parallel for schedule(static)
        for (long j = 0; j < mc_runs; ++j) {
            Rng rng(derive_seed(seed, 0xCA11B8A7Eull, static_cast<std::uint64_t>(j)));
            lengths[static_cast<std::size_t>(j)] = cusum_run_length(model, h, cap, rng);
        }
        double total = 0.0;
        for (long len : lengths) total += static_cast<double>(len);
        const double arl = total / static_cast<double>(mc_runs);
        result.trace.emplace_back(h, arl);
        return arl;
    };

    double lo = 0.0;
    double hi = 1.0;
    double arl_hi = estimate(hi);
    int doublings = 0;
    while (arl_hi < target_arl0) {
        lo = hi;
        hi *= 2.0;
        arl_hi = estimate(hi);
        if (++doublings > 60) {
            throw std::runtime_error("calibrate_cusum_threshold: bracket expansion failed");
        }
    }

    double best_h = hi;
    double best_arl = arl_hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double arl = estimate(mid);
        if (std::fabs(arl - target_arl0) < std::fabs(best_arl - target_arl0)) {
            best_h = mid;
            best_arl = arl;
        }
        if (std::fabs(arl - target_arl0) <= 0.02 * target_arl0) break;
        if (arl < target_arl0) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-9 * std::max(1.0, hi)) break;
    }
    result.h = best_h;
    result.estimated_arl = best_arl;
    result.within_tolerance = std::fabs(best_arl - target_arl0) <= 0.05 * target_arl0;
    return result;
}

} // namespace rmstop
