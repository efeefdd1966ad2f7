#include "rmstop/scorecard.hpp"

#include <stdexcept>

namespace rmstop {

void ScorecardConfig::validate(bool probability_scale) const {
    if (probability_scale) {
        if (!(epsilon > 0.0 && epsilon < 0.5)) {
            throw std::invalid_argument("ScorecardConfig: epsilon outside (0, 1/2)");
        }
    } else if (!(epsilon > 0.0)) {
        throw std::invalid_argument("ScorecardConfig: epsilon must be positive");
    }
    if (!(width_max > 0.0)) throw std::invalid_argument("ScorecardConfig: width_max must be positive");
    if (!(eta >= 0.0)) throw std::invalid_argument("ScorecardConfig: eta must be nonnegative");
    if (n_min < 1) throw std::invalid_argument("ScorecardConfig: n_min must be >= 1");
    if (n_max < n_min) throw std::invalid_argument("ScorecardConfig: n_max must be >= n_min");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ScorecardConfig: alpha outside (0,1)");
}

const char* rule_name(Rule rule) {
    switch (rule) {
    case Rule::boundary_only: return "boundary_only";
    case Rule::two_cond: return "two_cond";
    case Rule::rm: return "rm";
    case Rule::sprt: return "sprt";
    case Rule::cusum: return "cusum";
    }
    return "?";
}

double boundary_distance(double m) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::domain_error("boundary_distance: m outside [0,1]");
    return std::min(m, 1.0 - m);
}

double stability_defect(double m_curr, double m_prev) {
    if (!std::isfinite(m_curr) || !std::isfinite(m_prev)) {
        throw std::domain_error("stability_defect: values must be finite");
    }
    return std::fabs(m_curr - m_prev);
}

namespace {

void mark(StopReport& report, const StepScore& s) {
    report.stopped = true;
    report.tau = s.n;
    report.m_at_tau = s.m;
}

} // namespace

RuleReports evaluate_rules(std::span<const StepScore> scores, const ScorecardConfig& config) {
    if (scores.empty()) throw std::invalid_argument("evaluate_rules: empty score sequence");
    config.validate(false);
    RuleReports out;
    out.boundary_only.rule = Rule::boundary_only;
    out.two_cond.rule = Rule::two_cond;
    out.rm.rule = Rule::rm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const StepScore& s = scores[i];
        if (s.n != static_cast<long>(i) + 1) {
            throw std::invalid_argument("evaluate_rules: scores must be indexed 1..N contiguously");
        }
        if (s.n < config.n_min || s.n > config.n_max) continue;
        const bool close = s.b <= config.epsilon;
        const bool narrow = s.width <= config.width_max;
        const bool stable = s.r <= config.eta; // +inf <= +inf holds, so eta = inf disables the screen
        if (close && !out.boundary_only.stopped) mark(out.boundary_only, s);
        if (close && narrow && !out.two_cond.stopped) mark(out.two_cond, s);
        if (close && narrow && stable && !out.rm.stopped) mark(out.rm, s);
        if (out.rm.stopped) break; // nesting: nothing left to record
    }
    return out;
}

RuleReports region_scorecard(std::span<const std::vector<StepScore>> grid_scores,
                             const ScorecardConfig& config) {
    if (grid_scores.empty()) throw std::invalid_argument("region_scorecard: empty grid");
    const std::size_t len = grid_scores.front().size();
    for (const auto& seq : grid_scores) {
        if (seq.size() != len) {
            throw std::invalid_argument("region_scorecard: grid points must share step indexing");
        }
    }
    std::vector<StepScore> combined(len);
    for (std::size_t i = 0; i < len; ++i) {
        StepScore agg = grid_scores.front()[i];
        for (const auto& seq : grid_scores) {
            const StepScore& s = seq[i];
            if (s.n != agg.n) {
                throw std::invalid_argument("region_scorecard: grid points must share step indexing");
            }
            if (s.b > agg.b) {
                agg.b = s.b;
                agg.m = s.m; // report the target value at the worst grid point
            }
            agg.width = std::max(agg.width, s.width);
            agg.r = std::max(agg.r, s.r);
        }
        combined[i] = agg;
    }
    return evaluate_rules(combined, config);
}

} // namespace rmstop
