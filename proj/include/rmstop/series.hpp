#pragma once

#include "rmstop/scorecard.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rmstop {

struct SeriesRecord {
    long index = 0;  // time step (week or measurement order)
    double value = 0.0;
};

enum class SeriesSchema { ili, bll };

// Loads a CSV under the named schema. Returns nullopt when the file does not
// exist (the caller may fall back to a synthetic series); malformed rows and
// negative values raise a parse error naming the line.
std::optional<std::vector<SeriesRecord>> load_series_csv(const std::string& path,
                                                         SeriesSchema schema);

// Synthetic weekly influenza-like-illness consultation rate: 312 weeks of a
// seasonal bump with bounded noise (annual mean near 60, epidemic peak in
// [150, 200], off-season trough in [15, 25] per 10,000 visits).
std::vector<SeriesRecord> gen_ili_series(std::uint64_t seed);

// Synthetic blood-lead series: log-normal draws with the given geometric mean
// and geometric SD, floored at the detection limit.
std::vector<SeriesRecord> gen_bll_series(long n = 7000, double gm = 0.82, double gsd = 2.1,
                                         double detection_floor = 0.01, std::uint64_t seed = 1);

enum class MonitorModel { poisson_rate, gaussian_mean, bounded_mean };
const char* monitor_model_name(MonitorModel model);

struct MonitorStep {
    long n = 0;
    double m = 0.0;
    double b = 0.0;
    double width = 0.0;
    double r = 0.0;
    bool fired_bdy = false;
    bool fired_2cond = false;
    bool fired_rm = false;
};

struct MonitorTrace {
    std::vector<MonitorStep> steps;
    RuleReports reports;
};

// Sequential monitor over a single series: model-appropriate posterior mean,
// credible width, and step defect per observation, then the three rules.
//   poisson_rate: Gamma(1/2) prior running-rate band; boundary value 0.
//   gaussian_mean: normal posterior for the log-scale mean with plug-in
//     variance, back-transformed; boundary value 0 on the raw scale.
//   bounded_mean: Jeffreys Beta band for [0,1]-valued observations.
MonitorTrace monitor_series(std::span<const SeriesRecord> series, MonitorModel model,
                            const ScorecardConfig& config);

struct TraceMetadata {
    std::string model;
    bool synthetic = false;
    std::uint64_t seed = 0;
    ScorecardConfig config;
    std::string source; // input path or generator name
};

void emit_trace_csv(const MonitorTrace& trace, const TraceMetadata& meta, std::ostream& os);
std::vector<MonitorStep> parse_trace_csv(std::istream& is);

} // namespace rmstop
