#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace rmstop {

/**
 * Tuning tuple shared by every stopping rule: boundary threshold epsilon,
 * width cap, stability tolerance (may be +inf to disable the screen),
 * burn-in index, censoring horizon, and the coverage level behind the widths.
 */
struct ScorecardConfig {
    double epsilon = 0.05;
    double width_max = 0.05;
    double eta = std::numeric_limits<double>::infinity();
    long n_min = 30;
    long n_max = 5000;
    double alpha = 0.05;

    // probability_scale restricts epsilon to (0, 1/2); real-scale targets
    // (mean-distance boundaries) only require epsilon > 0.
    void validate(bool probability_scale = true) const;
};

// Per-step scorecard record consumed by the rules.
struct StepScore {
    long n = 0;
    double m = 0.0;     // target value M_n
    double b = 0.0;     // boundary distance B_n
    double width = 0.0; // uncertainty width W_n
    double r = 0.0;     // stability defect r_n (+inf at n = 1)
};

enum class Rule { boundary_only, two_cond, rm, sprt, cusum };
const char* rule_name(Rule rule);

struct StopReport {
    Rule rule = Rule::boundary_only;
    bool stopped = false;
    long tau = 0; // valid only when stopped
    double m_at_tau = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> mle_at_tau;

    // Censored runs compare as +inf, so rule nesting is an ordinary <=.
    double tau_or_infinity() const {
        return stopped ? static_cast<double>(tau) : std::numeric_limits<double>::infinity();
    }
};

struct RuleReports {
    StopReport boundary_only;
    StopReport two_cond;
    StopReport rm;
};

// min(m, 1-m); m must lie in [0,1].
double boundary_distance(double m);

// |m_curr - m_prev|; both must be finite.
double stability_defect(double m_curr, double m_prev);

// Evaluates the one-, two-, and three-condition rules over a score sequence
// indexed 1..N contiguously. Conditions are checked simultaneously at each
// step; each rule records its first qualifying index or stays censored.
RuleReports evaluate_rules(std::span<const StepScore> scores, const ScorecardConfig& config);

// Region-wise rule over a finite covariate grid: at each step the boundary
// distance, width, and defect are the componentwise maxima across the grid.
RuleReports region_scorecard(std::span<const std::vector<StepScore>> grid_scores,
                             const ScorecardConfig& config);

} // namespace rmstop
