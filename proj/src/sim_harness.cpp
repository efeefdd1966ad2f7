#include "rmstop/sim_harness.hpp"

#include "rmstop/benchmarks.hpp"
#include "rmstop/quasi_rm.hpp"
#include "rmstop/ridge_logistic.hpp"
#include "rmstop/rng.hpp"
#include "rmstop/targets.hpp"
#include "rmstop/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rmstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// First n in [max(1,s), n_max] with width_at(s, n) <= w, else n_max + 1.
// Widths contract in n for fixed s, so a binary search applies.
template <typename WidthAt>
long first_n_with_width(WidthAt width_at, long s, double w, long n_max) {
    long lo = std::max<long>(1, s);
    if (width_at(s, n_max) > w) return n_max + 1;
    if (width_at(s, lo) <= w) return lo;
    long hi = n_max; // invariant: width(lo) > w, width(hi) <= w
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (width_at(s, mid) <= w) hi = mid;
        else lo = mid;
    }
    return hi;
}

template <typename WidthAt>
std::vector<long> width_threshold_table(WidthAt width_at, double w, long s_cap, long n_max) {
    std::vector<long> tab(static_cast<std::size_t>(s_cap) + 1);
    for (long s = 0; s <= s_cap; ++s) {
        tab[static_cast<std::size_t>(s)] = first_n_with_width(width_at, s, w, n_max);
    }
    return tab;
}

double beta_width_at(long s, long n, double alpha) {
    return jeffreys_beta_width(s, n, alpha).width();
}

// First n with the deterministic gaussian width <= w, else n_max + 1.
long first_n_gaussian_width(double w, double sigma2, double alpha, long n_max) {
    if (gaussian_width(n_max, sigma2, alpha) > w) return n_max + 1;
    long lo = 0;
    long hi = n_max;
    if (gaussian_width(0, sigma2, alpha) <= w) return 1;
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (gaussian_width(mid, sigma2, alpha) <= w) hi = mid;
        else lo = mid;
    }
    return std::max<long>(1, hi);
}

struct FirstHit {
    bool hit = false;
    long tau = 0;
    double m = 0.0;
    double mle = 0.0;

    void consider(bool condition, long n, double m_val, double mle_val) {
        if (!hit && condition) {
            hit = true;
            tau = n;
            m = m_val;
            mle = mle_val;
        }
    }
    RepOutcome outcome(bool with_mle) const {
        RepOutcome o;
        o.stopped = hit;
        o.tau = tau;
        o.m_at_tau = m;
        o.mle = mle;
        o.has_mle = hit && with_mle;
        return o;
    }
};

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string cell_label(const char* k1, double v1, const char* k2, double v2) {
    return std::string(k1) + "=" + format_g(v1) + "," + k2 + "=" + format_g(v2);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

// ---------------------------------------------------------------------------
// Study 1: Bernoulli rare-event monitoring.
// ---------------------------------------------------------------------------

void run_study1(const StudyConfig& cfg, StudyResult& result) {
    const long cap_eps_n = static_cast<long>(
        std::ceil(*std::max_element(cfg.epsilons.begin(), cfg.epsilons.end()) *
                  static_cast<double>(cfg.n_max))) + 1;
    const std::vector<long> wtab = width_threshold_table(
        [&](long s, long n) { return beta_width_at(s, n, cfg.alpha); }, cfg.width_max,
        cap_eps_n, cfg.n_max);

    const long B = cfg.replications;
    std::vector<double> max_r(static_cast<std::size_t>(B));
    double global_max_r = 0.0;
    long cell_index = 0;
    for (double eps : cfg.epsilons) {
        for (double p : cfg.params) {
            std::vector<RepOutcome> bdy(B), two(B), rm(B), sprt(B);
            SprtConfig sprt_cfg{eps, eps / 2.0, cfg.sprt_alpha, cfg.sprt_beta};
            const double sprt_lo = sprt_cfg.lower();
            const double sprt_hi = sprt_cfg.upper();
            const double inc1 = std::log(sprt_cfg.p1 / sprt_cfg.p0);
            const double inc0 = std::log((1.0 - sprt_cfg.p1) / (1.0 - sprt_cfg.p0));

#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
            for (long rep = 0; rep < B; ++rep) {
                Rng rng(derive_seed(cfg.master_seed, 1, static_cast<std::uint64_t>(cell_index),
                                    static_cast<std::uint64_t>(rep)));
                FirstHit h_bdy, h_two, h_rm;
                bool sprt_done = false;
                FirstHit h_sprt;
                double llr = 0.0;
                long s = 0;
                double prev_m = 0.0;
                double rep_max_r = 0.0;
                for (long n = 1; n <= cfg.n_max; ++n) {
                    const int y = rng.bernoulli(p) ? 1 : 0;
                    s += y;
                    const double m = static_cast<double>(s) / static_cast<double>(n);
                    const double b = std::min(m, 1.0 - m);
                    const double r_step = n == 1 ? kInf : std::fabs(m - prev_m);
                    if (n > 1) rep_max_r = std::max(rep_max_r, r_step);
                    const bool in_window = n >= cfg.n_min;
                    const bool close = in_window && b <= eps;
                    const bool narrow = s <= cap_eps_n && n >= wtab[static_cast<std::size_t>(s)];
                    const bool stable =
                        cfg.r_source == RSource::exact_coherence ? true : r_step <= cfg.eta;
                    h_bdy.consider(close, n, m, m);
                    h_two.consider(close && narrow, n, m, m);
                    h_rm.consider(close && narrow && stable, n, m, m);
                    if (cfg.with_sprt && !sprt_done) {
                        llr += y ? inc1 : inc0;
                        if (llr >= sprt_hi) {
                            h_sprt.consider(true, n, llr, 0.0);
                            sprt_done = true;
                        } else if (llr <= sprt_lo) {
                            sprt_done = true;
                        }
                    }
                    prev_m = m;
                    if (h_rm.hit && (!cfg.with_sprt || sprt_done)) break;
                }
                bdy[rep] = h_bdy.outcome(false);
                two[rep] = h_two.outcome(false);
                rm[rep] = h_rm.outcome(true);
                sprt[rep] = h_sprt.outcome(false);
                max_r[static_cast<std::size_t>(rep)] = rep_max_r;
            }
            for (double v : max_r) global_max_r = std::max(global_max_r, v);

            const std::string label = cell_label("p", p, "eps", eps);
            auto push = [&](std::span<const RepOutcome> outcomes, const char* rule) {
                SummaryRow row = summarize(outcomes, p, eps);
                row.scenario = label;
                row.rule = rule;
                result.rows.push_back(std::move(row));
            };
            push(bdy, rule_name(Rule::boundary_only));
            push(two, rule_name(Rule::two_cond));
            push(rm, rule_name(Rule::rm));
            if (cfg.with_sprt) push(sprt, rule_name(Rule::sprt));
            ++cell_index;
        }
    }
    result.meta.max_step_diff_r = global_max_r;
}

// ---------------------------------------------------------------------------
// Study 3: Gaussian calibration with CUSUM comparator.
// ---------------------------------------------------------------------------

void run_study3(const StudyConfig& cfg, StudyResult& result) {
    const double sigma2 = 1.0;
    const double eps = cfg.epsilons.front();
    const long n_width = first_n_gaussian_width(cfg.width_max, sigma2, cfg.alpha, cfg.n_max);

    double cusum_h = 0.0;
    if (cfg.with_cusum) {
        CusumModel model;
        model.kind = CusumModel::Kind::normal;
        model.k = cfg.cusum_k;
        const CalibrationResult cal = calibrate_cusum_threshold(
            model, cfg.arl0, cfg.calib_runs, derive_seed(cfg.master_seed, 3, 0xCA1Bull));
        cusum_h = cal.h;
        result.meta.extra.emplace_back("cusum_h", format_g(cal.h));
        result.meta.extra.emplace_back("cusum_estimated_arl0", format_g(cal.estimated_arl));
    }

    const long B = cfg.replications;
    std::vector<double> max_r(static_cast<std::size_t>(B));
    double global_max_r = 0.0;
    long cell_index = 0;
    for (double mu : cfg.params) {
        std::vector<RepOutcome> bdy(B), two(B), rm(B), cus(B);
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
        for (long rep = 0; rep < B; ++rep) {
            Rng rng(derive_seed(cfg.master_seed, 3, static_cast<std::uint64_t>(cell_index),
                                static_cast<std::uint64_t>(rep)));
            FirstHit h_bdy, h_two, h_rm, h_cusum;
            double sum = 0.0;
            double s_cusum = 0.0;
            double prev_m = 0.0;
            double rep_max_r = 0.0;
            for (long n = 1; n <= cfg.n_max; ++n) {
                const double x = mu + rng.normal();
                sum += x;
                const double m = sum / (static_cast<double>(n) + sigma2); // posterior mean, N(0,1) prior
                const double b = std::fabs(m);
                const double r_step = n == 1 ? kInf : std::fabs(m - prev_m);
                if (n > 1) rep_max_r = std::max(rep_max_r, r_step);
                const bool close = n >= cfg.n_min && b <= eps;
                const bool narrow = n >= n_width;
                const bool stable =
                    cfg.r_source == RSource::exact_coherence ? true : r_step <= cfg.eta;
                h_bdy.consider(close, n, m, 0.0);
                h_two.consider(close && narrow, n, m, 0.0);
                h_rm.consider(close && narrow && stable, n, m, 0.0);
                if (cfg.with_cusum && !h_cusum.hit) {
                    s_cusum = std::max(0.0, s_cusum + x - cfg.cusum_k);
                    h_cusum.consider(s_cusum > cusum_h, n, s_cusum, 0.0);
                }
                prev_m = m;
                if (h_rm.hit && (!cfg.with_cusum || h_cusum.hit)) break;
            }
            bdy[rep] = h_bdy.outcome(false);
            two[rep] = h_two.outcome(false);
            rm[rep] = h_rm.outcome(false);
            cus[rep] = h_cusum.outcome(false);
            max_r[static_cast<std::size_t>(rep)] = rep_max_r;
        }
        for (double v : max_r) global_max_r = std::max(global_max_r, v);

        const std::string label = "mu=" + format_g(mu);
        auto push = [&](std::span<const RepOutcome> outcomes, const char* rule) {
            SummaryRow row = summarize(outcomes, mu, eps);
            row.scenario = label;
            row.rule = rule;
            result.rows.push_back(std::move(row));
        };
        push(bdy, rule_name(Rule::boundary_only));
        push(two, rule_name(Rule::two_cond));
        push(rm, rule_name(Rule::rm));
        if (cfg.with_cusum) push(cus, rule_name(Rule::cusum));
        ++cell_index;
    }
    result.meta.max_step_diff_r = global_max_r;
    result.meta.extra.emplace_back("gaussian_width_first_n", std::to_string(n_width));
}

// ---------------------------------------------------------------------------
// Study 4: Poisson rare-event surveillance with SPRT and CUSUM comparators.
// ---------------------------------------------------------------------------

void run_study4(const StudyConfig& cfg, StudyResult& result) {
    const long cap_eps_n = static_cast<long>(
        std::ceil(*std::max_element(cfg.epsilons.begin(), cfg.epsilons.end()) *
                  static_cast<double>(cfg.n_max))) + 1;
    auto gamma_width_at = [&](long s, long n) {
        const double rate = cfg.poisson_width_rate_n ? static_cast<double>(n)
                                                     : static_cast<double>(n) + 1.0;
        return gamma_interval(static_cast<double>(s) + 0.5, rate, cfg.alpha).width();
    };
    const std::vector<long> wtab =
        width_threshold_table(gamma_width_at, cfg.width_max, cap_eps_n, cfg.n_max);
    result.meta.extra.emplace_back("poisson_width_rate",
                                   cfg.poisson_width_rate_n ? "n" : "n+1");

    std::map<double, double> cusum_h;
    if (cfg.with_cusum) {
        for (double eps : cfg.epsilons) {
            CusumModel model;
            model.kind = CusumModel::Kind::poisson;
            model.lambda0 = eps;
            model.lambda1 = 2.0 * eps;
            const CalibrationResult cal = calibrate_cusum_threshold(
                model, cfg.arl0, cfg.calib_runs,
                derive_seed(cfg.master_seed, 4, 0xCA1Bull, static_cast<std::uint64_t>(eps * 1e6)));
            cusum_h[eps] = cal.h;
            result.meta.extra.emplace_back("cusum_h_eps_" + format_g(eps), format_g(cal.h));
            result.meta.extra.emplace_back("cusum_arl_eps_" + format_g(eps),
                                           format_g(cal.estimated_arl));
            result.meta.extra.emplace_back("cusum_arl_within_tol_eps_" + format_g(eps),
                                           cal.within_tolerance ? "true" : "false");
        }
    }

    const long B = cfg.replications;
    std::vector<double> max_r(static_cast<std::size_t>(B));
    double global_max_r = 0.0;
    long cell_index = 0;
    for (double eps : cfg.epsilons) {
        const double h = cfg.with_cusum ? cusum_h[eps] : 0.0;
        const double lr_sprt = std::log(0.5); // log((eps/2)/eps)
        const double sprt_lo = std::log(cfg.sprt_beta / (1.0 - cfg.sprt_alpha));
        const double sprt_hi = std::log((1.0 - cfg.sprt_beta) / cfg.sprt_alpha);
        const double lr_cusum = std::log(2.0); // log(2 eps / eps)
        for (double lambda : cfg.params) {
            std::vector<RepOutcome> bdy(B), two(B), rm(B), sprt(B), cus(B);
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
            for (long rep = 0; rep < B; ++rep) {
                Rng rng(derive_seed(cfg.master_seed, 4, static_cast<std::uint64_t>(cell_index),
                                    static_cast<std::uint64_t>(rep)));
                FirstHit h_bdy, h_two, h_rm, h_sprt, h_cusum;
                bool sprt_done = false;
                double llr = 0.0;
                double s_cusum = 0.0;
                long s = 0;
                double prev_m = 0.0;
                double rep_max_r = 0.0;
                for (long n = 1; n <= cfg.n_max; ++n) {
                    const long x = rng.poisson(lambda);
                    s += x;
                    const double m = static_cast<double>(s) / static_cast<double>(n);
                    const double b = m; // boundary value 0 on the rate scale
                    const double r_step = n == 1 ? kInf : std::fabs(m - prev_m);
                    if (n > 1) rep_max_r = std::max(rep_max_r, r_step);
                    const bool close = n >= cfg.n_min && b <= eps;
                    const bool narrow = s <= cap_eps_n && n >= wtab[static_cast<std::size_t>(s)];
                    const bool stable =
                        cfg.r_source == RSource::exact_coherence ? true : r_step <= cfg.eta;
                    h_bdy.consider(close, n, m, m);
                    h_two.consider(close && narrow, n, m, m);
                    h_rm.consider(close && narrow && stable, n, m, m);
                    if (cfg.with_sprt && !sprt_done) {
                        llr += static_cast<double>(x) * lr_sprt + eps / 2.0; // -(lambda1-lambda0)
                        if (llr >= sprt_hi) {
                            h_sprt.consider(true, n, llr, 0.0);
                            sprt_done = true;
                        } else if (llr <= sprt_lo) {
                            sprt_done = true;
                        }
                    }
                    if (cfg.with_cusum && !h_cusum.hit) {
                        s_cusum = std::max(0.0, s_cusum + static_cast<double>(x) * lr_cusum - eps);
                        h_cusum.consider(s_cusum > h, n, s_cusum, 0.0);
                    }
                    prev_m = m;
                    if (h_rm.hit && (!cfg.with_sprt || sprt_done) &&
                        (!cfg.with_cusum || h_cusum.hit)) {
                        break;
                    }
                }
                bdy[rep] = h_bdy.outcome(false);
                two[rep] = h_two.outcome(false);
                rm[rep] = h_rm.outcome(true);
                sprt[rep] = h_sprt.outcome(false);
                cus[rep] = h_cusum.outcome(false);
                max_r[static_cast<std::size_t>(rep)] = rep_max_r;
            }
            for (double v : max_r) global_max_r = std::max(global_max_r, v);

            const std::string label = cell_label("lambda", lambda, "eps", eps);
            auto push = [&](std::span<const RepOutcome> outcomes, const char* rule) {
                SummaryRow row = summarize(outcomes, lambda, eps);
                row.scenario = label;
                row.rule = rule;
                result.rows.push_back(std::move(row));
            };
            push(bdy, rule_name(Rule::boundary_only));
            push(two, rule_name(Rule::two_cond));
            push(rm, rule_name(Rule::rm));
            if (cfg.with_sprt) push(sprt, rule_name(Rule::sprt));
            if (cfg.with_cusum) push(cus, rule_name(Rule::cusum));
            ++cell_index;
        }
    }
    result.meta.max_step_diff_r = global_max_r;
}

// ---------------------------------------------------------------------------
// Study 2: rare-event ridge logistic regression at the covariate origin.
// ---------------------------------------------------------------------------

void run_study2(const StudyConfig& cfg, StudyResult& result) {
    long cell_index = 0;
    for (const auto& cell : cfg.logistic_cells) {
        const long B = cell.reps > 0 ? cell.reps : cfg.replications;
        const long fit_from = std::max<long>(2, cfg.n_min - 1);
        const long probe_n = std::min<long>(cfg.sep_probe_n, cell.n_max);
        std::vector<RepOutcome> bdy(B), two(B), rm(B);
        std::vector<char> separated(static_cast<std::size_t>(B), 0);

#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
        for (long rep = 0; rep < B; ++rep) {
            LogisticScenarioStream stream(
                cell.d, cell.rho,
                derive_seed(cfg.master_seed, 2, static_cast<std::uint64_t>(cell_index),
                            static_cast<std::uint64_t>(rep)));
            LogisticDesign design;
            design.ridge = cfg.ridge_lambda;
            design.reserve_rows(cell.n_max, cell.d);
            std::vector<double> features(static_cast<std::size_t>(cell.d));
            std::vector<double> x0(static_cast<std::size_t>(cell.d) + 1, 0.0);
            x0[0] = 1.0;
            std::vector<double> warm;
            FirstHit h_bdy, h_two, h_rm;
            double prev_m = 0.0;
            bool have_prev = false;
            for (long n = 1; n <= cell.n_max; ++n) {
                int label = 0;
                stream.next(features, label);
                design.add_row(features, label);
                if (n == probe_n) separated[static_cast<std::size_t>(rep)] =
                    detect_separation(design) ? 1 : 0;
                if (n < fit_from) continue;
                const FitResult fit = fit_ridge_logistic(design, 1e-8, 60, warm);
                warm = fit.beta;
                const double m = predict_prob(fit.beta, x0);
                const double width = predictive_width(fit, design, x0, cfg.alpha);
                const double b = std::min(m, 1.0 - m);
                const double r_step = have_prev ? std::fabs(m - prev_m) : kInf;
                prev_m = m;
                have_prev = true;
                if (n < cfg.n_min) continue;
                const bool close = b <= cfg.epsilons.front();
                const bool narrow = width <= cfg.width_max;
                const bool stable = r_step <= cfg.eta;
                h_bdy.consider(close, n, m, 0.0);
                h_two.consider(close && narrow, n, m, 0.0);
                h_rm.consider(close && narrow && stable, n, m, 0.0);
                if (h_bdy.hit && h_two.hit && h_rm.hit && n >= probe_n) break;
            }
            bdy[rep] = h_bdy.outcome(false);
            two[rep] = h_two.outcome(false);
            rm[rep] = h_rm.outcome(false);
        }

        long sep_count = 0;
        for (char c : separated) sep_count += c;
        const double pct_sep = 100.0 * static_cast<double>(sep_count) / static_cast<double>(B);

        std::ostringstream label;
        label << "d=" << cell.d << ",rho=" << format_g(cell.rho);
        auto push = [&](std::span<const RepOutcome> outcomes, const char* rule, bool with_sep) {
            SummaryRow row = summarize(outcomes, cell.rho, cfg.epsilons.front());
            row.scenario = label.str();
            row.rule = rule;
            if (with_sep) row.pct_sep = pct_sep;
            result.rows.push_back(std::move(row));
        };
        push(bdy, rule_name(Rule::boundary_only), true);
        push(two, rule_name(Rule::two_cond), false);
        push(rm, rule_name(Rule::rm), false);
        ++cell_index;
    }
}

// ---------------------------------------------------------------------------
// Study 7: quasi-reverse-martingale perturbations.
// ---------------------------------------------------------------------------

void run_study7(const StudyConfig& cfg, StudyResult& result) {
    const std::vector<long> wtab = width_threshold_table(
        [&](long s, long n) { return beta_width_at(s, n, cfg.alpha); }, cfg.width_max,
        cfg.n_max, cfg.n_max);
    const double eps = cfg.epsilons.front();
    const long B = cfg.replications;

    long total_eq = 0;
    long total_reps = 0;
    long cell_index = 0;
    for (const auto& variant : cfg.variants) {
        std::vector<RepOutcome> bdy(B), two(B), rm(B);
        std::vector<char> eq(static_cast<std::size_t>(B), 0);
        std::vector<std::vector<double>> checkpoint_r(
            cfg.defect_checkpoints.size(), std::vector<double>(static_cast<std::size_t>(B)));

#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
        for (long rep = 0; rep < B; ++rep) {
            const std::uint64_t seed =
                derive_seed(cfg.master_seed, 7, static_cast<std::uint64_t>(cell_index),
                            static_cast<std::uint64_t>(rep));
            TargetPath path;
            switch (variant.scenario) {
            case 'A': path = scenario_a(cfg.p_base, variant.param, cfg.n_max, seed); break;
            case 'B': path = scenario_b(cfg.p_base, variant.param, cfg.n_max, seed); break;
            case 'C': path = scenario_c(cfg.p_base, variant.param, cfg.n_max, seed); break;
            default: throw std::invalid_argument("run_study7: unknown scenario");
            }
            FirstHit h_bdy, h_two, h_rm;
            long s = 0;
            for (long n = 1; n <= cfg.n_max; ++n) {
                s += path.y[static_cast<std::size_t>(n - 1)];
                const double m = path.m[static_cast<std::size_t>(n - 1)];
                const double b = std::min(m, 1.0 - m);
                const double r_step =
                    n == 1 ? kInf
                           : std::fabs(m - path.m[static_cast<std::size_t>(n - 2)]);
                const bool close = n >= cfg.n_min && b <= eps;
                const bool narrow = n >= wtab[static_cast<std::size_t>(s)];
                const bool stable = r_step <= cfg.eta;
                h_bdy.consider(close, n, m, 0.0);
                h_two.consider(close && narrow, n, m, 0.0);
                h_rm.consider(close && narrow && stable, n, m, 0.0);
            }
            for (std::size_t c = 0; c < cfg.defect_checkpoints.size(); ++c) {
                const long cp = cfg.defect_checkpoints[c];
                checkpoint_r[c][static_cast<std::size_t>(rep)] =
                    std::fabs(path.m[static_cast<std::size_t>(cp - 1)] -
                              path.m[static_cast<std::size_t>(cp - 2)]);
            }
            eq[static_cast<std::size_t>(rep)] =
                (h_rm.hit == h_two.hit && (!h_rm.hit || h_rm.tau == h_two.tau)) ? 1 : 0;
            bdy[rep] = h_bdy.outcome(false);
            two[rep] = h_two.outcome(false);
            rm[rep] = h_rm.outcome(false);
        }

        long eq_count = 0;
        for (char c : eq) eq_count += c;
        total_eq += eq_count;
        total_reps += B;

        std::ostringstream label;
        label << variant.scenario << ",param=" << format_g(variant.param);
        auto push = [&](std::span<const RepOutcome> outcomes, const char* rule, bool detail) {
            SummaryRow row = summarize(outcomes, std::nullopt, eps);
            row.scenario = label.str();
            row.rule = rule;
            if (detail) {
                row.pct_rm_eq_2cond =
                    100.0 * static_cast<double>(eq_count) / static_cast<double>(B);
                const std::size_t k = cfg.defect_checkpoints.size();
                if (k > 0) row.r_med_100 = median_of(checkpoint_r[0]);
                if (k > 1) row.r_med_500 = median_of(checkpoint_r[1]);
                if (k > 2) row.r_med_2000 = median_of(checkpoint_r[2]);
            }
            result.rows.push_back(std::move(row));
        };
        push(bdy, rule_name(Rule::boundary_only), false);
        push(two, rule_name(Rule::two_cond), false);
        push(rm, rule_name(Rule::rm), true);
        ++cell_index;
    }
    result.meta.extra.emplace_back(
        "pct_rm_eq_2cond_overall",
        format_g(100.0 * static_cast<double>(total_eq) / static_cast<double>(total_reps)));
}

} // namespace

const char* r_source_name(RSource s) {
    return s == RSource::exact_coherence ? "exact_coherence" : "step_diff";
}

void StudyConfig::validate() const {
    if (replications < 1) throw std::invalid_argument("StudyConfig: replications must be >= 1");
    if (n_min < 1 || n_max < n_min) throw std::invalid_argument("StudyConfig: bad n_min/n_max");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("StudyConfig: alpha outside (0,1)");
    if (!(width_max > 0.0)) throw std::invalid_argument("StudyConfig: width_max must be positive");
    if (!(eta >= 0.0)) throw std::invalid_argument("StudyConfig: eta must be nonnegative");
    switch (id) {
    case 1:
    case 4:
        if (params.empty() || epsilons.empty()) {
            throw std::invalid_argument("StudyConfig: empty parameter grid");
        }
        for (double eps : epsilons) {
            if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("StudyConfig: bad epsilon");
        }
        for (double v : params) {
            if (!(v > 0.0)) throw std::invalid_argument("StudyConfig: bad grid value");
        }
        break;
    case 3:
        if (params.empty() || epsilons.size() != 1) {
            throw std::invalid_argument("StudyConfig: study 3 needs mu grid and one epsilon");
        }
        break;
    case 2:
        if (logistic_cells.empty() || epsilons.size() != 1) {
            throw std::invalid_argument("StudyConfig: study 2 needs logistic cells and one epsilon");
        }
        for (const auto& c : logistic_cells) {
            if (c.d < 1 || !(c.rho > 0.0 && c.rho < 1.0) || c.n_max < n_min) {
                throw std::invalid_argument("StudyConfig: bad logistic cell");
            }
        }
        break;
    case 7:
        if (variants.empty() || epsilons.size() != 1) {
            throw std::invalid_argument("StudyConfig: study 7 needs variants and one epsilon");
        }
        if (!(p_base > 0.0 && p_base < 1.0)) throw std::invalid_argument("StudyConfig: bad p_base");
        for (long cp : defect_checkpoints) {
            if (cp < 2 || cp > n_max) throw std::invalid_argument("StudyConfig: bad checkpoint");
        }
        break;
    default:
        throw std::invalid_argument("StudyConfig: study id must be one of {1,2,3,4,7}");
    }
}

StudyConfig default_study_config(int id, long replications, std::uint64_t master_seed) {
    StudyConfig cfg;
    cfg.id = id;
    cfg.replications = replications;
    cfg.master_seed = master_seed;
    switch (id) {
    case 1:
        cfg.n_max = 5000;
        cfg.width_max = 0.02;
        cfg.eta = 1e-6;
        cfg.params = {0.001, 0.005, 0.010, 0.050};
        cfg.epsilons = {0.005, 0.010};
        cfg.with_sprt = true;
        cfg.r_source = RSource::exact_coherence;
        break;
    case 2:
        cfg.n_max = 1000;
        cfg.width_max = 0.05;
        cfg.eta = 0.01;
        cfg.epsilons = {0.05};
        cfg.logistic_cells = {{3, 0.01, 500, 0}, {3, 0.005, 500, 0}, {20, 0.01, 1000, 0}};
        cfg.ridge_lambda = 1.0;
        cfg.sep_probe_n = 100;
        cfg.r_source = RSource::step_diff;
        break;
    case 3:
        cfg.n_max = 3000;
        cfg.width_max = 0.05;
        cfg.eta = 1e-6;
        cfg.params = {0.0, 0.01, 0.02, 0.05, 0.10};
        cfg.epsilons = {0.05};
        cfg.with_cusum = true;
        cfg.cusum_k = 0.025;
        cfg.r_source = RSource::exact_coherence;
        break;
    case 4:
        cfg.n_max = 5000;
        cfg.width_max = 0.02;
        cfg.eta = 1e-6;
        cfg.params = {0.001, 0.005, 0.010, 0.050};
        cfg.epsilons = {0.005, 0.010};
        cfg.with_sprt = true;
        cfg.with_cusum = true;
        cfg.r_source = RSource::exact_coherence;
        break;
    case 7:
        cfg.n_max = 2000;
        cfg.width_max = 0.05;
        cfg.eta = 0.01;
        cfg.epsilons = {0.05};
        cfg.p_base = 0.01;
        cfg.variants = {{'A', 0.0}, {'A', 0.3}, {'A', 1.0}, {'B', 1.0}, {'B', 0.75},
                        {'B', 0.5}, {'C', 0.0}, {'C', 0.5}, {'C', 2.0}};
        cfg.r_source = RSource::step_diff;
        break;
    default:
        throw std::invalid_argument("default_study_config: study id must be one of {1,2,3,4,7}");
    }
    return cfg;
}

StudyResult run_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyResult result;
    result.meta.study = cfg.id;
    result.meta.replications = cfg.replications;
    result.meta.master_seed = cfg.master_seed;
    result.meta.r_source = r_source_name(cfg.r_source);
    switch (cfg.id) {
    case 1: run_study1(cfg, result); break;
    case 2: run_study2(cfg, result); break;
    case 3: run_study3(cfg, result); break;
    case 4: run_study4(cfg, result); break;
    case 7: run_study7(cfg, result); break;
    default: throw std::invalid_argument("run_study: study id must be one of {1,2,3,4,7}");
    }
    return result;
}

SummaryRow summarize(std::span<const RepOutcome> outcomes, std::optional<double> truth,
                     double epsilon) {
    if (outcomes.empty()) throw std::invalid_argument("summarize: empty outcome set");
    SummaryRow row;
    std::vector<double> taus;
    long mle_zero = 0;
    long mle_known = 0;
    for (const RepOutcome& o : outcomes) {
        if (!o.stopped) continue;
        taus.push_back(static_cast<double>(o.tau));
        if (o.has_mle) {
            ++mle_known;
            if (o.mle == 0.0) ++mle_zero;
        }
    }
    row.pct_stop = 100.0 * static_cast<double>(taus.size()) / static_cast<double>(outcomes.size());
    if (!taus.empty()) {
        double sum = 0.0;
        for (double t : taus) sum += t;
        const double mean = sum / static_cast<double>(taus.size());
        row.mean_tau = mean;
        if (taus.size() > 1) {
            double ss = 0.0;
            for (double t : taus) ss += (t - mean) * (t - mean);
            row.sd_tau = std::sqrt(ss / static_cast<double>(taus.size() - 1));
        }
        row.median_tau = median_of(taus);
    }
    if (truth && *truth > epsilon) row.fdr_pct = row.pct_stop;
    if (mle_known > 0) {
        row.pct_mle_zero = 100.0 * static_cast<double>(mle_zero) / static_cast<double>(mle_known);
    }
    return row;
}

double error_control_false_rate(double epsilon, long replications, long n_min, long n_max,
                                double alpha, std::uint64_t seed, bool parallel) {
    if (!(epsilon > 0.0 && epsilon < 0.25)) {
        throw std::invalid_argument("error_control_false_rate: epsilon outside (0, 1/4)");
    }
    if (replications < 1) throw std::invalid_argument("error_control_false_rate: bad replications");
    const double p = 2.0 * epsilon;
    // Containment I_n subset [0, eps] holds iff the upper endpoint is <= eps;
    // it is impossible once the posterior mean exceeds eps.
    const long s_cap =
        static_cast<long>(std::ceil(epsilon * static_cast<double>(n_max + 1))) + 1;
    std::vector<long> utab(static_cast<std::size_t>(s_cap) + 1);
    for (long s = 0; s <= s_cap; ++s) {
        auto upper_at = [&](long n) { return jeffreys_beta_width(s, n, alpha).upper; };
        long first = n_max + 1;
        long lo = std::max<long>(1, s);
        if (upper_at(n_max) <= epsilon) {
            if (upper_at(lo) <= epsilon) {
                first = lo;
            } else {
                long hi = n_max;
                while (hi - lo > 1) {
                    const long mid = lo + (hi - lo) / 2;
                    if (upper_at(mid) <= epsilon) hi = mid;
                    else lo = mid;
                }
                first = hi;
            }
        }
        utab[static_cast<std::size_t>(s)] = first;
    }
    std::vector<char> declared(static_cast<std::size_t>(replications), 0);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long rep = 0; rep < replications; ++rep) {
        Rng rng(derive_seed(seed, 0xE44ull, static_cast<std::uint64_t>(rep)));
        long s = 0;
        for (long n = 1; n <= n_max; ++n) {
            s += rng.bernoulli(p) ? 1 : 0;
            if (n >= n_min && s <= s_cap && n >= utab[static_cast<std::size_t>(s)]) {
                declared[static_cast<std::size_t>(rep)] = 1;
                break;
            }
        }
    }
    long count = 0;
    for (char c : declared) count += c;
    return 100.0 * static_cast<double>(count) / static_cast<double>(replications);
}

// ---------------------------------------------------------------------------
// Table emission
// ---------------------------------------------------------------------------

namespace {

const char* kHeader =
    "study,scenario,rule,pct_stop,mean_tau,sd_tau,median_tau,fdr_pct,pct_mle_zero,pct_sep,"
    "r_med_100,r_med_500,r_med_2000,pct_rm_eq_2cond";

std::string fmt_fixed1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string fmt_median(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(v)));
    return buf;
}

std::string fmt_sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string opt_cell(const std::optional<double>& v, std::string (*fmt)(double)) {
    return v ? fmt(*v) : "na";
}

std::vector<std::string> row_cells(int study, const SummaryRow& r) {
    return {std::to_string(study),
            r.scenario,
            r.rule,
            fmt_fixed1(r.pct_stop),
            opt_cell(r.mean_tau, fmt_fixed1),
            opt_cell(r.sd_tau, fmt_fixed1),
            opt_cell(r.median_tau, fmt_median),
            opt_cell(r.fdr_pct, fmt_fixed1),
            opt_cell(r.pct_mle_zero, fmt_fixed1),
            opt_cell(r.pct_sep, fmt_fixed1),
            opt_cell(r.r_med_100, fmt_sci),
            opt_cell(r.r_med_500, fmt_sci),
            opt_cell(r.r_med_2000, fmt_sci),
            opt_cell(r.pct_rm_eq_2cond, fmt_fixed1)};
}

void write_metadata(const RunMetadata& meta, std::ostream& os) {
    os << "# study=" << meta.study << "\n";
    os << "# replications=" << meta.replications << "\n";
    os << "# master_seed=" << meta.master_seed << "\n";
    os << "# r_source=" << meta.r_source << "\n";
    if (meta.max_step_diff_r) os << "# max_step_diff_r=" << fmt_sci(*meta.max_step_diff_r) << "\n";
    for (const auto& [k, v] : meta.extra) os << "# " << k << "=" << v << "\n";
}

} // namespace

void emit_table_csv(const StudyResult& result, std::ostream& os) {
    write_metadata(result.meta, os);
    os << kHeader << "\n";
    for (const SummaryRow& r : result.rows) {
        const auto cells = row_cells(result.meta.study, r);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ",";
            os << cells[i];
        }
        os << "\n";
    }
}

void emit_table_json(const StudyResult& result, std::ostream& os) {
    nlohmann::ordered_json doc;
    doc["metadata"] = {{"study", result.meta.study},
                       {"replications", result.meta.replications},
                       {"master_seed", result.meta.master_seed},
                       {"r_source", result.meta.r_source}};
    if (result.meta.max_step_diff_r) {
        doc["metadata"]["max_step_diff_r"] = *result.meta.max_step_diff_r;
    }
    for (const auto& [k, v] : result.meta.extra) doc["metadata"][k] = v;
    doc["rows"] = nlohmann::ordered_json::array();
    std::istringstream header(kHeader);
    std::vector<std::string> names;
    for (std::string tok; std::getline(header, tok, ',');) names.push_back(tok);
    for (const SummaryRow& r : result.rows) {
        const auto cells = row_cells(result.meta.study, r);
        nlohmann::ordered_json jrow;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (names[i] == "scenario" || names[i] == "rule") {
                jrow[names[i]] = cells[i];
            } else if (cells[i] == "na") {
                jrow[names[i]] = nullptr;
            } else {
                jrow[names[i]] = std::stod(cells[i]);
            }
        }
        doc["rows"].push_back(std::move(jrow));
    }
    os << doc.dump(2) << "\n";
}

std::vector<SummaryRow> parse_table_csv(std::istream& is) {
    std::vector<SummaryRow> rows;
    std::string line;
    bool header_seen = false;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kHeader) {
                throw std::runtime_error("parse_table_csv: unexpected header at line " +
                                         std::to_string(line_no));
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ss(line);
        for (std::string tok; std::getline(ss, tok, ',');) cells.push_back(tok);
        // scenario labels may contain commas ("p=...,eps=..."); rebuild the
        // label from the fixed column count.
        const std::size_t want = 14;
        while (cells.size() > want) {
            cells[1] += "," + cells[2];
            cells.erase(cells.begin() + 2);
        }
        if (cells.size() != want) {
            throw std::runtime_error("parse_table_csv: malformed row at line " +
                                     std::to_string(line_no));
        }
        SummaryRow r;
        r.scenario = cells[1];
        r.rule = cells[2];
        auto opt = [](const std::string& s) -> std::optional<double> {
            if (s == "na") return std::nullopt;
            return std::stod(s);
        };
        r.pct_stop = std::stod(cells[3]);
        r.mean_tau = opt(cells[4]);
        r.sd_tau = opt(cells[5]);
        r.median_tau = opt(cells[6]);
        r.fdr_pct = opt(cells[7]);
        r.pct_mle_zero = opt(cells[8]);
        r.pct_sep = opt(cells[9]);
        r.r_med_100 = opt(cells[10]);
        r.r_med_500 = opt(cells[11]);
        r.r_med_2000 = opt(cells[12]);
        r.pct_rm_eq_2cond = opt(cells[13]);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace rmstop
