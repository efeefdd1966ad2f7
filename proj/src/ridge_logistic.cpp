#include "rmstop/ridge_logistic.hpp"

#include "rmstop/rng.hpp"
#include "rmstop/special_functions.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmstop {

namespace {

double expit(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

// log(1 + exp(s)) without overflow
double log1pexp(double s) {
    if (s > 0.0) return s + std::log1p(std::exp(-s));
    return std::log1p(std::exp(s));
}

struct NewtonOutcome {
    FitResult fit;
    bool saturated = false; // every observation classified to within 1e-6
};

NewtonOutcome newton_logistic(const LogisticDesign& design, double lambda, double tol,
                              int max_iter, double diverge_norm,
                              std::span<const double> warm_start) {
    const long n = design.n();
    const int d = design.dim();
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
        design.x.data(), n, d);
    VectorXd yv(n);
    for (long i = 0; i < n; ++i) yv(i) = design.y[i];

    VectorXd beta = VectorXd::Zero(d);
    if (static_cast<int>(warm_start.size()) == d) {
        for (int j = 0; j < d; ++j) beta(j) = warm_start[j];
    }

    auto objective = [&](const VectorXd& b) {
        const VectorXd s = X * b;
        double value = 0.0;
        for (long i = 0; i < n; ++i) value += yv(i) * s(i) - log1pexp(s(i));
        return value - 0.5 * lambda * b.squaredNorm();
    };

    NewtonOutcome out;
    out.fit.beta.assign(d, 0.0);
    double f = objective(beta);
    if (!std::isfinite(f)) throw std::runtime_error("fit_ridge_logistic: non-finite objective");

    double prev_norm = beta.norm();
    VectorXd p(n), w(n);
    for (int it = 1; it <= max_iter; ++it) {
        const VectorXd s = X * beta;
        double max_resid = 0.0;
        for (long i = 0; i < n; ++i) {
            p(i) = expit(s(i));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
            max_resid = std::max(max_resid, std::fabs(yv(i) - p(i)));
        }
        if (max_resid <= 1e-6) {
            // Perfect classification is attainable only under complete separation.
            out.saturated = true;
            out.fit.iterations = it;
            out.fit.separation_flag = true;
            for (int j = 0; j < d; ++j) out.fit.beta[j] = beta(j);
            return out;
        }
        VectorXd grad = X.transpose() * (yv - p) - lambda * beta;
        out.fit.grad_norm = grad.norm();
        if (out.fit.grad_norm <= tol) {
            out.fit.converged = true;
            out.fit.iterations = it - 1;
            out.fit.separation_flag = beta.norm() > diverge_norm;
            for (int j = 0; j < d; ++j) out.fit.beta[j] = beta(j);
            return out;
        }
        MatrixXd h = X.transpose() * w.asDiagonal() * X;
        h.diagonal().array() += lambda + 1e-12;
        const VectorXd step = h.ldlt().solve(grad);
        if (step.norm() <= 1e-6 * (1.0 + beta.norm())) {
            // terminal Newton contraction; objective changes are below the
            // floating-point resolution of f, so skip the line search
            beta += step;
            f = objective(beta);
        } else {
            double t = 1.0;
            VectorXd cand = beta + step;
            double fc = objective(cand);
            for (int halve = 0; halve < 40 && !(fc >= f - 1e-14); ++halve) {
                t *= 0.5;
                cand = beta + t * step;
                fc = objective(cand);
            }
            if (!std::isfinite(fc)) {
                throw std::runtime_error("fit_ridge_logistic: non-finite objective");
            }
            beta = cand;
            f = fc;
        }
        const double norm = beta.norm();
        if (norm > diverge_norm) {
            out.fit.iterations = it;
            out.fit.separation_flag = true;
            for (int j = 0; j < d; ++j) out.fit.beta[j] = beta(j);
            return out;
        }
        prev_norm = norm;
    }
    out.fit.iterations = max_iter;
    out.fit.separation_flag = beta.norm() >= prev_norm && beta.norm() > 1.0;
    for (int j = 0; j < d; ++j) out.fit.beta[j] = beta(j);
    return out;
}

} // namespace

void LogisticDesign::reserve_rows(long rows, int d) {
    dim_ = d + 1;
    x.reserve(static_cast<std::size_t>(rows) * dim_);
    y.reserve(rows);
}

void LogisticDesign::add_row(std::span<const double> features, int label) {
    if (label != 0 && label != 1) throw std::invalid_argument("LogisticDesign: label must be 0/1");
    if (dim_ == 0) dim_ = static_cast<int>(features.size()) + 1;
    if (static_cast<int>(features.size()) + 1 != dim_) {
        throw std::invalid_argument("LogisticDesign: inconsistent feature dimension");
    }
    x.push_back(1.0);
    for (double v : features) {
        if (!std::isfinite(v)) throw std::invalid_argument("LogisticDesign: non-finite feature");
        x.push_back(v);
    }
    y.push_back(label);
}

FitResult fit_ridge_logistic(const LogisticDesign& design, double tol, int max_iter,
                             std::span<const double> warm_start) {
    if (design.n() < 1) throw std::invalid_argument("fit_ridge_logistic: empty design");
    if (!(design.ridge >= 0.0)) throw std::invalid_argument("fit_ridge_logistic: ridge must be >= 0");
    const double no_escape = 1e12; // penalized fits are bounded; effectively no norm escape
    return newton_logistic(design, design.ridge, tol, max_iter, no_escape, warm_start).fit;
}

bool detect_separation(const LogisticDesign& design, double diverge_norm, int max_iter) {
    if (design.n() < 1) throw std::invalid_argument("detect_separation: empty design");
    long pos = 0;
    for (int label : design.y) pos += label;
    if (pos == 0 || pos == design.n()) return true; // one-class data: separated by definition
    const NewtonOutcome out = newton_logistic(design, 0.0, 1e-8, max_iter, diverge_norm, {});
    return out.fit.separation_flag;
}

double predict_prob(std::span<const double> beta, std::span<const double> x_with_intercept) {
    if (beta.size() != x_with_intercept.size()) {
        throw std::invalid_argument("predict_prob: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) s += beta[j] * x_with_intercept[j];
    const double p = expit(s);
    // keep the strict interior even where expit rounds to an endpoint
    if (p >= 1.0) return std::nextafter(1.0, 0.0);
    if (p <= 0.0) return std::numeric_limits<double>::min();
    return p;
}

double predictive_width(const FitResult& fit, const LogisticDesign& design,
                        std::span<const double> x0, double alpha) {
    const int d = design.dim();
    if (static_cast<int>(fit.beta.size()) != d || static_cast<int>(x0.size()) != d) {
        throw std::invalid_argument("predictive_width: dimension mismatch");
    }
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const long n = design.n();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
        design.x.data(), n, d);
    Eigen::Map<const VectorXd> beta(fit.beta.data(), d);
    VectorXd w(n);
    const VectorXd s = X * beta;
    for (long i = 0; i < n; ++i) {
        const double p = expit(s(i));
        w(i) = p * (1.0 - p);
    }
    MatrixXd h = X.transpose() * w.asDiagonal() * X;
    h.diagonal().array() += design.ridge;
    const Eigen::LDLT<MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw std::runtime_error("predictive_width: singular Hessian");
    }
    Eigen::Map<const VectorXd> x0v(x0.data(), d);
    const double quad = x0v.dot(ldlt.solve(x0v));
    if (!(quad >= 0.0)) throw std::runtime_error("predictive_width: singular Hessian");
    const double phat = predict_prob(fit.beta, x0);
    const double z = sf::norm_quantile(1.0 - alpha / 2.0);
    return 2.0 * z * std::sqrt(quad) * phat * (1.0 - phat);
}

LogisticScenarioStream::LogisticScenarioStream(int d, double rho, std::uint64_t seed)
    : d_(d), intercept_(std::log(rho / (1.0 - rho))), rng_(seed) {
    if (d < 1) throw std::invalid_argument("LogisticScenarioStream: d must be >= 1");
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("LogisticScenarioStream: rho outside (0,1)");
    }
}

void LogisticScenarioStream::next(std::span<double> features_out, int& label_out) {
    if (static_cast<int>(features_out.size()) != d_) {
        throw std::invalid_argument("LogisticScenarioStream: feature span size mismatch");
    }
    for (int j = 0; j < d_; ++j) features_out[j] = rng_.normal();
    label_out = rng_.bernoulli(expit(intercept_)) ? 1 : 0;
}

} // namespace rmstop
