#pragma once

#include "rmstop/scorecard.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rmstop {

// Source of the stability defect fed to the three-condition rule.
//   exact_coherence: the reverse-coherence defect of the sufficient-statistic
//     target, identically zero for the exact families (the screen is then
//     structurally non-binding).
//   step_diff: the observable |M_n - M_{n-1}| proxy.
enum class RSource { exact_coherence, step_diff };
const char* r_source_name(RSource s);

struct SummaryRow {
    std::string scenario;
    std::string rule;
    double pct_stop = 0.0;
    std::optional<double> mean_tau;
    std::optional<double> sd_tau;
    std::optional<double> median_tau;
    std::optional<double> fdr_pct;
    std::optional<double> pct_mle_zero;
    std::optional<double> pct_sep;
    std::optional<double> r_med_100;
    std::optional<double> r_med_500;
    std::optional<double> r_med_2000;
    std::optional<double> pct_rm_eq_2cond;
};

// Outcome of one replication under one rule.
struct RepOutcome {
    bool stopped = false;
    long tau = 0;
    double m_at_tau = 0.0;
    double mle = 0.0;
    bool has_mle = false;
};

// Declarative description of one simulation study.
struct StudyConfig {
    int id = 1;
    long replications = 1000;
    std::uint64_t master_seed = 20250811;
    bool parallel = true;

    long n_min = 30;
    long n_max = 5000;
    double alpha = 0.05;
    double width_max = 0.02;
    double eta = 1e-6;
    RSource r_source = RSource::exact_coherence;

    std::vector<double> params;   // true p / mu / lambda grid
    std::vector<double> epsilons; // practical thresholds

    // Poisson credible-width rate divisor: n reproduces the published count
    // tables; n+1 is the conjugate Gamma(s+1/2, n+1) form.
    bool poisson_width_rate_n = true;

    // classical comparators
    bool with_sprt = false;
    bool with_cusum = false;
    double sprt_alpha = 0.05;
    double sprt_beta = 0.05;
    double cusum_k = 0.025;
    double arl0 = 500.0;
    long calib_runs = 2000;

    // logistic study
    struct LogisticCell {
        int d = 3;
        double rho = 0.01;
        long n_max = 500;
        long reps = 0; // 0: inherit replications
    };
    std::vector<LogisticCell> logistic_cells;
    double ridge_lambda = 1.0;
    long sep_probe_n = 100; // dataset size for the separation frequency probe

    // perturbation study
    struct QuasiVariant {
        char scenario = 'A'; // 'A' heterogeneity, 'B' smoothing, 'C' vb damping
        double param = 0.0;
    };
    std::vector<QuasiVariant> variants;
    double p_base = 0.01;
    std::vector<long> defect_checkpoints = {100, 500, 2000};

    void validate() const;
};

// Published-table defaults for studies 1, 2, 3, 4, 7.
StudyConfig default_study_config(int id, long replications = 1000,
                                 std::uint64_t master_seed = 20250811);

struct RunMetadata {
    int study = 0;
    long replications = 0;
    std::uint64_t master_seed = 0;
    std::string r_source;
    std::optional<double> max_step_diff_r; // realized max |M_n - M_{n-1}| across runs
    std::vector<std::pair<std::string, std::string>> extra;
};

struct StudyResult {
    std::vector<SummaryRow> rows;
    RunMetadata meta;
};

// Runs every grid cell with cfg.replications independent replications.
// Replication j of cell c derives its seed from (master_seed, id, c, j), so
// emitted tables are byte-identical regardless of parallelism.
StudyResult run_study(const StudyConfig& cfg);

// Summary statistics over one cell's outcomes: %stop, conditional mean/sd/
// median of tau, FDR when the truth strictly exceeds epsilon, and the
// fraction of stops with an exactly-zero MLE when outcomes carry one.
SummaryRow summarize(std::span<const RepOutcome> outcomes, std::optional<double> truth,
                     double epsilon);

void emit_table_csv(const StudyResult& result, std::ostream& os);
void emit_table_json(const StudyResult& result, std::ostream& os);
std::vector<SummaryRow> parse_table_csv(std::istream& is);

// Fraction (percent) of replications that ever falsely declare under the
// interval-containment rule I_n subset of [0, epsilon] when the truth is
// p = 2 epsilon.
double error_control_false_rate(double epsilon, long replications, long n_min, long n_max,
                                double alpha, std::uint64_t seed, bool parallel = true);

} // namespace rmstop
