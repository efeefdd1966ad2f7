// Command-line front end: simulation studies, single-series monitoring,
// CUSUM calibration, and the all-failure sample-size threshold.

#include "rmstop/benchmarks.hpp"
#include "rmstop/series.hpp"
#include "rmstop/sim_harness.hpp"
#include "rmstop/uncertainty.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

std::uint64_t resolve_seed(std::uint64_t cli_seed, bool seed_given) {
    if (seed_given) return cli_seed;
    if (const char* env = std::getenv("RMSTOP_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("RMSTOP_SEED is not a valid unsigned integer");
        }
    }
    return cli_seed;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + path);
    return out;
}

int run_study_command(int id, long reps, std::uint64_t seed, const std::string& out_path,
                      const std::string& format, bool serial) {
    if (id == 5 || id == 6) {
        // Realistic-scale single-series runs on the shipped synthetic fallback.
        rmstop::ScorecardConfig config;
        rmstop::TraceMetadata meta;
        meta.synthetic = true;
        meta.seed = seed;
        std::vector<rmstop::SeriesRecord> series;
        rmstop::MonitorModel model;
        if (id == 5) {
            series = rmstop::gen_ili_series(seed);
            model = rmstop::MonitorModel::poisson_rate;
            config.epsilon = 5.0;
            config.width_max = 1.0;
            config.eta = 0.5;
            config.n_min = 30;
            config.n_max = static_cast<long>(series.size());
            meta.source = "gen_ili_series";
        } else {
            series = rmstop::gen_bll_series(7000, 0.82, 2.1, 0.01, seed);
            model = rmstop::MonitorModel::gaussian_mean;
            config.epsilon = 1.50;
            config.width_max = 0.20;
            config.eta = 0.02;
            config.n_min = 30;
            config.n_max = static_cast<long>(series.size());
            meta.source = "gen_bll_series";
        }
        meta.model = rmstop::monitor_model_name(model);
        meta.config = config;
        const rmstop::MonitorTrace trace = rmstop::monitor_series(series, model, config);
        auto out = open_output(out_path);
        rmstop::emit_trace_csv(trace, meta, out);
        std::cout << "wrote trace with " << trace.steps.size() << " steps to " << out_path << "\n";
        return kExitOk;
    }

    rmstop::StudyConfig cfg = rmstop::default_study_config(id, reps, seed);
    cfg.parallel = !serial;
    const rmstop::StudyResult result = rmstop::run_study(cfg);
    auto out = open_output(out_path);
    if (format == "json") {
        rmstop::emit_table_json(result, out);
    } else {
        rmstop::emit_table_csv(result, out);
    }
    std::cout << "wrote " << result.rows.size() << " summary rows to " << out_path << "\n";
    return kExitOk;
}

int run_monitor_command(const std::string& input, const std::string& model_name, double epsilon,
                        double width_max, double eta, long n_min, double alpha,
                        std::uint64_t seed, const std::string& out_path) {
    rmstop::MonitorModel model;
    rmstop::SeriesSchema schema;
    std::string fallback;
    if (model_name == "ili" || model_name == "poisson_rate") {
        model = rmstop::MonitorModel::poisson_rate;
        schema = rmstop::SeriesSchema::ili;
        fallback = model_name == "ili" ? "gen_ili_series" : "";
    } else if (model_name == "bll" || model_name == "gaussian_mean") {
        model = rmstop::MonitorModel::gaussian_mean;
        schema = rmstop::SeriesSchema::bll;
        fallback = model_name == "bll" ? "gen_bll_series" : "";
    } else if (model_name == "bounded_mean") {
        model = rmstop::MonitorModel::bounded_mean;
        schema = rmstop::SeriesSchema::bll;
    } else {
        throw std::invalid_argument("unknown model: " + model_name);
    }

    rmstop::TraceMetadata meta;
    meta.model = rmstop::monitor_model_name(model);
    meta.seed = seed;

    std::vector<rmstop::SeriesRecord> series;
    std::optional<std::vector<rmstop::SeriesRecord>> loaded;
    if (!input.empty()) loaded = rmstop::load_series_csv(input, schema);
    if (loaded) {
        series = std::move(*loaded);
        meta.source = input;
        meta.synthetic = false;
    } else {
        if (fallback.empty()) {
            throw std::invalid_argument(
                input.empty() ? "model " + model_name + " has no synthetic fallback; --input required"
                              : "input file not found and model " + model_name +
                                    " has no synthetic fallback: " + input);
        }
        if (!input.empty()) {
            std::cerr << "notice: " << input << " not found; falling back to " << fallback << "\n";
        } else {
            std::cerr << "notice: no --input given; using synthetic " << fallback << "\n";
        }
        series = fallback == "gen_ili_series" ? rmstop::gen_ili_series(seed)
                                              : rmstop::gen_bll_series(7000, 0.82, 2.1, 0.01, seed);
        meta.source = fallback;
        meta.synthetic = true;
    }
    if (series.empty()) throw std::invalid_argument("empty series: nothing to monitor");

    rmstop::ScorecardConfig config;
    config.epsilon = epsilon;
    config.width_max = width_max;
    config.eta = eta;
    config.n_min = n_min;
    config.n_max = static_cast<long>(series.size());
    config.alpha = alpha;
    meta.config = config;

    const rmstop::MonitorTrace trace = rmstop::monitor_series(series, model, config);
    auto out = open_output(out_path);
    rmstop::emit_trace_csv(trace, meta, out);

    auto describe = [](const rmstop::StopReport& r) {
        return r.stopped ? "tau=" + std::to_string(r.tau) : std::string("censored");
    };
    std::cout << "boundary_only: " << describe(trace.reports.boundary_only) << "\n"
              << "two_cond:      " << describe(trace.reports.two_cond) << "\n"
              << "rm:            " << describe(trace.reports.rm) << "\n";
    return kExitOk;
}

int run_calibrate_command(const std::string& model_name, double arl0, std::uint64_t seed,
                          double k, double lambda0, double lambda1, long runs) {
    rmstop::CusumModel model;
    if (model_name == "normal") {
        model.kind = rmstop::CusumModel::Kind::normal;
        model.k = k;
    } else if (model_name == "poisson") {
        model.kind = rmstop::CusumModel::Kind::poisson;
        model.lambda0 = lambda0;
        model.lambda1 = lambda1;
    } else {
        throw std::invalid_argument("unknown cusum model: " + model_name);
    }
    const rmstop::CalibrationResult cal =
        rmstop::calibrate_cusum_threshold(model, arl0, runs, seed);
    std::cout << "h=" << cal.h << " estimated_arl0=" << cal.estimated_arl
              << " mc_runs=" << cal.mc_runs << " probes=" << cal.trace.size() << "\n";
    return kExitOk;
}

int run_threshold_command(double alpha, double epsilon) {
    const long n = rmstop::all_failure_threshold(alpha, epsilon);
    std::cout << "all_failure_threshold(alpha=" << alpha << ", epsilon=" << epsilon << ") = " << n
              << "\n";
    std::cout << "clopper_pearson_upper_zero(n=" << n
              << ") = " << rmstop::clopper_pearson_upper_zero(n, alpha) << " <= " << epsilon
              << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reverse-martingale boundary-declaration toolkit"};
    app.require_subcommand(1);

    // study
    auto* study = app.add_subcommand("study", "run a simulation study and emit its summary table");
    int study_id = 1;
    long study_reps = 1000;
    std::uint64_t study_seed = 20250811;
    std::string study_out;
    std::string study_format = "csv";
    bool study_serial = false;
    study->add_option("--id", study_id, "study id (1-7)")->required()->check(CLI::Range(1, 7));
    study->add_option("--reps", study_reps, "replications per grid cell");
    auto* study_seed_opt = study->add_option("--seed", study_seed, "master seed");
    study->add_option("--out", study_out, "output path")->required();
    study->add_option("--format", study_format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    study->add_flag("--serial", study_serial, "disable the parallel replication engine");

    // monitor
    auto* monitor = app.add_subcommand("monitor", "monitor a single series with the scorecard");
    std::string mon_input;
    std::string mon_model;
    double mon_eps = 0.0;
    double mon_w = 0.0;
    double mon_eta = std::numeric_limits<double>::infinity();
    long mon_nmin = 30;
    double mon_alpha = 0.05;
    std::uint64_t mon_seed = 1;
    std::string mon_out;
    monitor->add_option("--input", mon_input, "input CSV (falls back to synthetic when absent)");
    monitor->add_option("--model", mon_model,
                        "ili | bll | poisson_rate | gaussian_mean | bounded_mean")
        ->required();
    monitor->add_option("--epsilon", mon_eps, "practical boundary threshold")->required();
    monitor->add_option("--width-max", mon_w, "uncertainty width threshold")->required();
    monitor->add_option("--eta", mon_eta, "stability tolerance (default: disabled)");
    monitor->add_option("--n-min", mon_nmin, "burn-in index");
    monitor->add_option("--alpha", mon_alpha, "credible level for widths");
    auto* mon_seed_opt = monitor->add_option("--seed", mon_seed, "seed for synthetic fallback");
    monitor->add_option("--out", mon_out, "output trace path")->required();

    // calibrate-cusum
    auto* calib = app.add_subcommand("calibrate-cusum", "calibrate a CUSUM threshold by ARL");
    std::string cal_model;
    double cal_arl0 = 500.0;
    std::uint64_t cal_seed = 1;
    double cal_k = 0.025;
    double cal_l0 = 0.01;
    double cal_l1 = 0.02;
    long cal_runs = 2000;
    calib->add_option("--model", cal_model, "normal | poisson")->required();
    calib->add_option("--arl0", cal_arl0, "target in-control average run length");
    auto* cal_seed_opt = calib->add_option("--seed", cal_seed, "calibration seed");
    calib->add_option("--k", cal_k, "normal reference value");
    calib->add_option("--lambda0", cal_l0, "poisson in-control rate");
    calib->add_option("--lambda1", cal_l1, "poisson out-of-control rate");
    calib->add_option("--runs", cal_runs, "Monte Carlo runs per probe");

    // threshold
    auto* thresh = app.add_subcommand("threshold", "all-failure sample-size threshold");
    double th_alpha = 0.05;
    double th_eps = 0.05;
    thresh->add_option("--alpha", th_alpha, "type-I level")->required();
    thresh->add_option("--epsilon", th_eps, "practical threshold")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (study->parsed()) {
            return run_study_command(study_id, study_reps,
                                     resolve_seed(study_seed, study_seed_opt->count() > 0),
                                     study_out, study_format, study_serial);
        }
        if (monitor->parsed()) {
            return run_monitor_command(mon_input, mon_model, mon_eps, mon_w, mon_eta, mon_nmin,
                                       mon_alpha, resolve_seed(mon_seed, mon_seed_opt->count() > 0),
                                       mon_out);
        }
        if (calib->parsed()) {
            return run_calibrate_command(cal_model, cal_arl0,
                                         resolve_seed(cal_seed, cal_seed_opt->count() > 0), cal_k,
                                         cal_l0, cal_l1, cal_runs);
        }
        if (thresh->parsed()) {
            return run_threshold_command(th_alpha, th_eps);
        }
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
