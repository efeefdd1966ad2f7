#pragma once

#include "rmstop/scorecard.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rmstop {

/**
 * Wald SPRT configuration for H0: p = p0 vs H1: p = p1 with p1 < p0.
 * The alternative is the boundary-favoring hypothesis; accepting H1 is the
 * rule's "stop" event, accepting H0 censors the run.
 */
struct SprtConfig {
    double p0 = 0.0;
    double p1 = 0.0;
    double alpha = 0.05;
    double beta = 0.05;

    double lower() const; // a = log(beta / (1 - alpha)) < 0
    double upper() const; // b = log((1 - beta) / alpha) > 0
    void validate() const;
};

StopReport sprt_bernoulli_run(std::span<const int> path, const SprtConfig& cfg, long n_max);

// Closed-form H1 acceptance time on an all-failure path.
long sprt_all_failure_time(const SprtConfig& cfg);

StopReport sprt_poisson_run(std::span<const long> path, double lambda0, double lambda1,
                            double alpha, double beta, long n_max);

// One-sided upward CUSUM: S_n = max(0, S_{n-1} + x_n - k), stop when S_n > h.
StopReport cusum_normal_run(std::span<const double> path, double k, double h, long n_max);

// Poisson log-likelihood-ratio CUSUM with lambda1 > lambda0, reflected at 0.
StopReport cusum_poisson_run(std::span<const long> path, double lambda0, double lambda1,
                             double h, long n_max);

struct CusumModel {
    enum class Kind { normal, poisson };
    Kind kind = Kind::normal;
    double k = 0.025;       // normal reference value
    double lambda0 = 0.0;   // poisson in-control rate
    double lambda1 = 0.0;   // poisson out-of-control rate
};

struct CalibrationResult {
    double h = 0.0;
    double estimated_arl = 0.0;
    bool within_tolerance = false; // |estimated - target| <= 5% of target
    long mc_runs = 0;
    std::vector<std::pair<double, double>> trace; // (h, estimated ARL) per bisection probe
};

// Bisection on h against a Monte Carlo in-control ARL estimate. Runs are
// capped at 50 * target_arl0 and censored runs count at the cap. Common
// random numbers across h probes make the trace monotone; deterministic
// given the seed and independent of thread count.
//
// Low-rate Poisson charts have lattice-valued run lengths, so the ARL can
// jump across the target; the result is then the nearest attainable shelf
// with within_tolerance = false. Bracket expansion failure throws.
CalibrationResult calibrate_cusum_threshold(const CusumModel& model, double target_arl0,
                                            long mc_runs, std::uint64_t seed);

} // namespace rmstop
