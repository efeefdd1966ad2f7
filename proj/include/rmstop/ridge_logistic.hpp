#pragma once

#include "rmstop/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rmstop {

/**
 * Row-major logistic design with an explicit intercept column prepended to
 * every row. `dim()` is the covariate dimension plus one.
 */
struct LogisticDesign {
    std::vector<double> x; // n * dim, first entry of each row is 1
    std::vector<int> y;
    double ridge = 1.0;
    int dim_ = 0;

    long n() const { return static_cast<long>(y.size()); }
    int dim() const { return dim_; }
    void reserve_rows(long rows, int d);
    void add_row(std::span<const double> features, int label);
    std::span<const double> row(long i) const { return {x.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
};

struct FitResult {
    std::vector<double> beta;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
    bool separation_flag = false;
};

// Damped Newton ascent of the ridge-penalized log-likelihood. Step halving
// keeps the penalized objective nondecreasing; convergence means the gradient
// norm fell below tol. Exhausting max_iter yields a flagged, non-converged
// result rather than an error.
FitResult fit_ridge_logistic(const LogisticDesign& design, double tol = 1e-8, int max_iter = 100,
                             std::span<const double> warm_start = {});

// Unpenalized complete-separation probe. One-class data are separated by
// definition. Otherwise runs unpenalized damped Newton from zero and flags
// divergence: coefficient norm escaping diverge_norm, perfect classification
// of every observation, or a non-converged fit with growing norm.
bool detect_separation(const LogisticDesign& design, double diverge_norm = 50.0,
                       int max_iter = 100);

// Overflow-safe expit of the linear score.
double predict_prob(std::span<const double> beta, std::span<const double> x_with_intercept);

// Delta-method width 2 z_{alpha/2} sqrt(x0' H^-1 x0) p(1-p) with H the
// penalized Hessian at the fitted coefficients.
double predictive_width(const FitResult& fit, const LogisticDesign& design,
                        std::span<const double> x0, double alpha);

/**
 * Covariate stream for the rare-event design: x ~ N(0, I_d) and labels drawn
 * with success probability expit(logit(rho)); deterministic per seed.
 */
class LogisticScenarioStream {
public:
    LogisticScenarioStream(int d, double rho, std::uint64_t seed);
    // Fills d feature values (intercept excluded) and the label.
    void next(std::span<double> features_out, int& label_out);

private:
    int d_;
    double intercept_;
    Rng rng_;
};

} // namespace rmstop
