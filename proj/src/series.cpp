#include "rmstop/series.hpp"

#include "rmstop/rng.hpp"
#include "rmstop/special_functions.hpp"
#include "rmstop/uncertainty.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rmstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) {
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
        std::size_t start = 0;
        while (start < tok.size() && tok[start] == ' ') ++start;
        out.push_back(tok.substr(start));
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

[[noreturn]] void parse_fail(const std::string& path, long line_no, const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + why);
}

} // namespace

std::optional<std::vector<SeriesRecord>> load_series_csv(const std::string& path,
                                                         SeriesSchema schema) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::vector<SeriesRecord> records;
    std::string line;
    long line_no = 0;
    bool first_data_line = true;
    const std::size_t want = schema == SeriesSchema::ili ? 3u : 1u;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (cells.empty()) continue;
        double probe = 0.0;
        if (first_data_line) {
            first_data_line = false;
            if (!parse_double(cells[0], probe)) continue; // header row
        }
        if (cells.size() != want) {
            parse_fail(path, line_no, "expected " + std::to_string(want) + " columns, got " +
                                          std::to_string(cells.size()));
        }
        double value = 0.0;
        if (!parse_double(cells[want - 1], value)) parse_fail(path, line_no, "non-numeric value");
        if (schema == SeriesSchema::ili) {
            double year = 0.0;
            double week = 0.0;
            if (!parse_double(cells[0], year) || !parse_double(cells[1], week)) {
                parse_fail(path, line_no, "non-numeric year/week");
            }
        }
        if (value < 0.0) parse_fail(path, line_no, "negative value");
        records.push_back({static_cast<long>(records.size()) + 1, value});
    }
    return records;
}

std::vector<SeriesRecord> gen_ili_series(std::uint64_t seed) {
    const long n_weeks = 312; // six 52-week seasons
    const double trough = 20.0;
    const double peak_gain = 140.0;
    const double concentration = 2.0;
    const long peak_week = 4; // early-January peak
    Rng rng(derive_seed(seed, 0x111ull));
    std::vector<SeriesRecord> series(n_weeks);
    for (long t = 0; t < n_weeks; ++t) {
        const double phase =
            2.0 * M_PI * static_cast<double>((t % 52) - peak_week) / 52.0;
        const double bump = std::exp(concentration * (std::cos(phase) - 1.0));
        const double base = trough + peak_gain * bump;
        const double noise = 1.0 + 0.06 * std::tanh(rng.normal()); // bounded +-6%
        series[t] = {t + 1, base * noise};
    }
    return series;
}

std::vector<SeriesRecord> gen_bll_series(long n, double gm, double gsd, double detection_floor,
                                         std::uint64_t seed) {
    if (!(gm > 0.0) || !(gsd > 0.0)) throw std::domain_error("gen_bll_series: gm and gsd must be positive");
    if (n < 1) throw std::domain_error("gen_bll_series: n must be >= 1");
    Rng rng(derive_seed(seed, 0xB11ull));
    const double mu = std::log(gm);
    const double sigma = std::log(gsd);
    std::vector<SeriesRecord> series(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double v = std::exp(mu + sigma * rng.normal());
        series[static_cast<std::size_t>(i)] = {i + 1, std::max(detection_floor, v)};
    }
    return series;
}

const char* monitor_model_name(MonitorModel model) {
    switch (model) {
    case MonitorModel::poisson_rate: return "poisson_rate";
    case MonitorModel::gaussian_mean: return "gaussian_mean";
    case MonitorModel::bounded_mean: return "bounded_mean";
    }
    return "?";
}

MonitorTrace monitor_series(std::span<const SeriesRecord> series, MonitorModel model,
                            const ScorecardConfig& config) {
    if (series.empty()) throw std::invalid_argument("monitor_series: empty series");
    config.validate(model == MonitorModel::bounded_mean);
    const double z = sf::norm_quantile(1.0 - config.alpha / 2.0);

    const long horizon = std::min<long>(config.n_max, static_cast<long>(series.size()));
    std::vector<StepScore> scores(static_cast<std::size_t>(horizon));
    double total = 0.0;
    double log_mean = 0.0;
    double log_m2 = 0.0;
    double prev_m = 0.0;
    for (long n = 1; n <= horizon; ++n) {
        const double x = series[static_cast<std::size_t>(n - 1)].value;
        double m = 0.0;
        double width = kInf;
        double b = 0.0;
        switch (model) {
        case MonitorModel::poisson_rate: {
            if (x < 0.0) throw std::domain_error("monitor_series: negative value under poisson_rate");
            total += x;
            m = (total + 0.5) / (static_cast<double>(n) + 1.0);
            const IntervalWidth iw =
                gamma_interval(total + 0.5, static_cast<double>(n) + 1.0, config.alpha);
            width = iw.width();
            b = m; // distance to the zero-rate boundary
            break;
        }
        case MonitorModel::gaussian_mean: {
            if (!(x > 0.0)) throw std::domain_error("monitor_series: gaussian_mean needs positive values");
            const double lx = std::log(x);
            const double delta = lx - log_mean;
            log_mean += delta / static_cast<double>(n);
            log_m2 += delta * (lx - log_mean);
            const double var = n > 1 ? log_m2 / static_cast<double>(n - 1) : 1.0;
            const double shrink = static_cast<double>(n) / var + 1.0; // unit normal prior on the log mean
            const double post_mean = (static_cast<double>(n) * log_mean / var) / shrink;
            const double half = z / std::sqrt(shrink);
            m = std::exp(post_mean);
            width = n > 1 ? std::exp(post_mean + half) - std::exp(post_mean - half) : kInf;
            b = m; // distance to the zero boundary, raw scale
            break;
        }
        case MonitorModel::bounded_mean: {
            if (!(x >= 0.0 && x <= 1.0)) {
                throw std::domain_error("monitor_series: bounded_mean needs values in [0,1]");
            }
            total += x;
            m = (total + 0.5) / (static_cast<double>(n) + 1.0);
            const IntervalWidth iw = beta_interval(
                total + 0.5, static_cast<double>(n) - total + 0.5, config.alpha);
            width = iw.width();
            b = std::min(m, 1.0 - m);
            break;
        }
        }
        const double r = n == 1 ? kInf : std::fabs(m - prev_m);
        scores[static_cast<std::size_t>(n - 1)] = {n, m, b, width, r};
        prev_m = m;
    }

    MonitorTrace trace;
    trace.reports = evaluate_rules(scores, config);
    trace.steps.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const StepScore& s = scores[i];
        MonitorStep step;
        step.n = s.n;
        step.m = s.m;
        step.b = s.b;
        step.width = s.width;
        step.r = s.r;
        step.fired_bdy = trace.reports.boundary_only.stopped && trace.reports.boundary_only.tau == s.n;
        step.fired_2cond = trace.reports.two_cond.stopped && trace.reports.two_cond.tau == s.n;
        step.fired_rm = trace.reports.rm.stopped && trace.reports.rm.tau == s.n;
        trace.steps[i] = step;
    }
    return trace;
}

namespace {

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void emit_trace_csv(const MonitorTrace& trace, const TraceMetadata& meta, std::ostream& os) {
    os << "# model=" << meta.model << "\n";
    os << "# source=" << meta.source << "\n";
    os << "# synthetic=" << (meta.synthetic ? "true" : "false") << "\n";
    os << "# seed=" << meta.seed << "\n";
    os << "# epsilon=" << full_precision(meta.config.epsilon) << "\n";
    os << "# width_max=" << full_precision(meta.config.width_max) << "\n";
    os << "# eta=" << full_precision(meta.config.eta) << "\n";
    os << "# n_min=" << meta.config.n_min << "\n";
    os << "# n_max=" << meta.config.n_max << "\n";
    os << "# alpha=" << full_precision(meta.config.alpha) << "\n";
    os << "n,m,b,width,r,fired_bdy,fired_2cond,fired_rm\n";
    for (const MonitorStep& s : trace.steps) {
        os << s.n << "," << full_precision(s.m) << "," << full_precision(s.b) << ","
           << full_precision(s.width) << "," << full_precision(s.r) << "," << (s.fired_bdy ? 1 : 0)
           << "," << (s.fired_2cond ? 1 : 0) << "," << (s.fired_rm ? 1 : 0) << "\n";
    }
}

std::vector<MonitorStep> parse_trace_csv(std::istream& is) {
    std::vector<MonitorStep> steps;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 8) throw std::runtime_error("parse_trace_csv: malformed row");
        MonitorStep s;
        s.n = std::stol(cells[0]);
        s.m = std::stod(cells[1]);
        s.b = std::stod(cells[2]);
        s.width = std::stod(cells[3]);
        s.r = std::stod(cells[4]);
        s.fired_bdy = cells[5] == "1";
        s.fired_2cond = cells[6] == "1";
        s.fired_rm = cells[7] == "1";
        steps.push_back(s);
    }
    return steps;
}

} // namespace rmstop
