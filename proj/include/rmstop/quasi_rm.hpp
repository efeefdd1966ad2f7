#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rmstop {

// Raw Bernoulli observations plus the scenario's target trajectory M_1..M_n.
struct TargetPath {
    std::vector<double> m;
    std::vector<std::int8_t> y;
};

// Plain Bernoulli(p) stream; the shared observation source for every
// perturbation scenario, so the exact variants reduce to it bit-for-bit.
std::vector<std::int8_t> bernoulli_path(double p, long n_max, std::uint64_t seed);

// Scenario A: latent logit heterogeneity. Each observation draws its own
// success probability expit(logit(p_base) + sigma Z_i); M_n is the running
// mean. sigma = 0 reproduces the plain stream exactly.
TargetPath scenario_a(double p_base, double sigma, long n_max, std::uint64_t seed);

// Scenario B: exponential smoothing M_n = a_n Y_n + (1 - a_n) M_{n-1} with
// a_n = n^-gamma and M_1 = Y_1. gamma = 1 is the running mean exactly.
TargetPath scenario_b(double p_base, double gamma, long n_max, std::uint64_t seed);

// Scenario C: damped pseudo-count update with Jeffreys base (1/2, 1/2) and
// forgetting weight kappa/(n + kappa); kappa = 0 is the conjugate update.
TargetPath scenario_c(double p_base, double kappa, long n_max, std::uint64_t seed);

// Target-only views matching the generator signatures above.
std::vector<double> scenario_a_path(double p_base, double sigma, long n_max, std::uint64_t seed);
std::vector<double> scenario_b_path(double p_base, double gamma, long n_max, std::uint64_t seed);
std::vector<double> scenario_c_path(double p_base, double kappa, long n_max, std::uint64_t seed);

// Cross-replication median of r_n = |M_n - M_{n-1}| at each checkpoint.
std::vector<double> defect_summary(const std::vector<std::vector<double>>& m_paths,
                                   std::span<const long> checkpoints);

} // namespace rmstop
