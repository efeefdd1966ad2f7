#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rmstop/series.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace rmstop;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& contents)
        : path("/tmp/rmstop_test_" + name) {
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("ili csv loads ordered records") {
    TempFile f("ili.csv", "year,week,rate\n2018,1,62.1\n2018,2,70.4\n2018,3,55.0\n");
    const auto loaded = load_series_csv(f.path, SeriesSchema::ili);
    REQUIRE(loaded.has_value());
    REQUIRE(loaded->size() == 3);
    CHECK((*loaded)[0].index == 1);
    CHECK((*loaded)[0].value == doctest::Approx(62.1));
    CHECK((*loaded)[2].value == doctest::Approx(55.0));
}

TEST_CASE("negative rate names the offending line") {
    TempFile f("ili_neg.csv", "year,week,rate\n2018,1,62.1\n2018,2,-3\n");
    try {
        load_series_csv(f.path, SeriesSchema::ili);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        CHECK(std::string(e.what()).find("negative") != std::string::npos);
    }
}

TEST_CASE("malformed column counts are rejected with line numbers") {
    TempFile f("ili_cols.csv", "year,week,rate\n2018,1\n");
    CHECK_THROWS_AS(load_series_csv(f.path, SeriesSchema::ili), std::runtime_error);
}

TEST_CASE("header-only file loads as an empty series which the monitor refuses") {
    TempFile f("ili_empty.csv", "year,week,rate\n");
    const auto loaded = load_series_csv(f.path, SeriesSchema::ili);
    REQUIRE(loaded.has_value());
    CHECK(loaded->empty());
    ScorecardConfig cfg;
    cfg.epsilon = 1.0;
    cfg.n_max = 10;
    CHECK_THROWS_AS(monitor_series(*loaded, MonitorModel::poisson_rate, cfg),
                    std::invalid_argument);
}

TEST_CASE("missing file signals fallback eligibility") {
    CHECK_FALSE(load_series_csv("/tmp/rmstop_no_such_file.csv", SeriesSchema::bll).has_value());
}

TEST_CASE("bll schema reads single-column files") {
    TempFile f("bll.csv", "value\n0.5\n1.25\n0.01\n");
    const auto loaded = load_series_csv(f.path, SeriesSchema::bll);
    REQUIRE(loaded.has_value());
    REQUIRE(loaded->size() == 3);
    CHECK((*loaded)[1].value == doctest::Approx(1.25));
}

TEST_CASE("synthetic ili series matches its calibration envelope") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto series = gen_ili_series(seed);
        REQUIRE(series.size() == 312);
        double total = 0.0;
        double peak = 0.0;
        double trough = 1e9;
        for (const SeriesRecord& r : series) {
            total += r.value;
            peak = std::max(peak, r.value);
            trough = std::min(trough, r.value);
        }
        const double mean = total / 312.0;
        CHECK(mean >= 50.0);
        CHECK(mean <= 70.0);
        CHECK(peak >= 150.0);
        CHECK(peak <= 200.0);
        CHECK(trough >= 15.0);
        CHECK(trough <= 25.0);
    }
    const auto a = gen_ili_series(4);
    const auto b = gen_ili_series(4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].value == b[i].value);
}

TEST_CASE("synthetic bll series matches its calibration") {
    const auto series = gen_bll_series(7000, 0.82, 2.1, 0.01, 1);
    REQUIRE(series.size() == 7000);
    double log_total = 0.0;
    double min_v = 1e9;
    for (const SeriesRecord& r : series) {
        log_total += std::log(r.value);
        min_v = std::min(min_v, r.value);
    }
    const double gm = std::exp(log_total / 7000.0);
    CHECK(gm >= 0.82 * 0.95);
    CHECK(gm <= 0.82 * 1.05);
    CHECK(min_v >= 0.01);
    const auto again = gen_bll_series(7000, 0.82, 2.1, 0.01, 1);
    CHECK(again[123].value == series[123].value);
}

TEST_CASE("constant series far from the boundary censors every rule") {
    std::vector<SeriesRecord> series(200);
    for (long i = 0; i < 200; ++i) series[i] = {i + 1, 60.0};
    ScorecardConfig cfg;
    cfg.epsilon = 5.0;
    cfg.width_max = 1.0;
    cfg.n_min = 10;
    cfg.n_max = 200;
    const MonitorTrace trace = monitor_series(series, MonitorModel::poisson_rate, cfg);
    CHECK_FALSE(trace.reports.boundary_only.stopped);
    CHECK_FALSE(trace.reports.two_cond.stopped);
    CHECK_FALSE(trace.reports.rm.stopped);
}

TEST_CASE("synthetic bll run declares boundary strictly before the rm rule") {
    const auto series = gen_bll_series(7000, 0.82, 2.1, 0.01, 1);
    ScorecardConfig cfg;
    cfg.epsilon = 1.50;
    cfg.width_max = 0.20;
    cfg.eta = 0.02;
    cfg.n_min = 30;
    cfg.n_max = 7000;
    const MonitorTrace trace = monitor_series(series, MonitorModel::gaussian_mean, cfg);
    REQUIRE(trace.reports.boundary_only.stopped);
    REQUIRE(trace.reports.rm.stopped);
    CHECK(trace.reports.boundary_only.tau < trace.reports.rm.tau);
}

TEST_CASE("shipped ili default never fires") {
    const auto series = gen_ili_series(1);
    ScorecardConfig cfg;
    cfg.epsilon = 5.0;
    cfg.width_max = 1.0;
    cfg.eta = 0.5;
    cfg.n_min = 30;
    cfg.n_max = 312;
    const MonitorTrace trace = monitor_series(series, MonitorModel::poisson_rate, cfg);
    CHECK_FALSE(trace.reports.boundary_only.stopped);
    CHECK_FALSE(trace.reports.two_cond.stopped);
    CHECK_FALSE(trace.reports.rm.stopped);
}

TEST_CASE("monitor trace keeps the rule-nesting invariant stepwise") {
    const auto series = gen_bll_series(2000, 0.82, 2.1, 0.01, 7);
    ScorecardConfig cfg;
    cfg.epsilon = 1.50;
    cfg.width_max = 0.20;
    cfg.eta = 0.02;
    cfg.n_min = 30;
    cfg.n_max = 2000;
    const MonitorTrace trace = monitor_series(series, MonitorModel::gaussian_mean, cfg);
    CHECK(trace.reports.boundary_only.tau_or_infinity() <=
          trace.reports.two_cond.tau_or_infinity());
    CHECK(trace.reports.two_cond.tau_or_infinity() <= trace.reports.rm.tau_or_infinity());
    long fired_bdy = 0;
    long fired_rm = 0;
    for (const MonitorStep& s : trace.steps) {
        fired_bdy += s.fired_bdy ? 1 : 0;
        fired_rm += s.fired_rm ? 1 : 0;
    }
    CHECK(fired_bdy == (trace.reports.boundary_only.stopped ? 1 : 0));
    CHECK(fired_rm == (trace.reports.rm.stopped ? 1 : 0));
}

TEST_CASE("bounded-mean model validates its range") {
    std::vector<SeriesRecord> bad(40);
    for (long i = 0; i < 40; ++i) bad[i] = {i + 1, 2.0};
    ScorecardConfig cfg;
    cfg.epsilon = 0.05;
    cfg.n_max = 40;
    CHECK_THROWS_AS(monitor_series(bad, MonitorModel::bounded_mean, cfg), std::domain_error);
}

TEST_CASE("trace csv round-trips at full precision") {
    const auto series = gen_bll_series(500, 0.82, 2.1, 0.01, 3);
    ScorecardConfig cfg;
    cfg.epsilon = 1.50;
    cfg.width_max = 0.20;
    cfg.eta = 0.02;
    cfg.n_min = 30;
    cfg.n_max = 500;
    const MonitorTrace trace = monitor_series(series, MonitorModel::gaussian_mean, cfg);
    TraceMetadata meta;
    meta.model = monitor_model_name(MonitorModel::gaussian_mean);
    meta.synthetic = true;
    meta.seed = 3;
    meta.config = cfg;
    meta.source = "gen_bll_series";
    std::ostringstream os;
    emit_trace_csv(trace, meta, os);
    std::istringstream is(os.str());
    const auto steps = parse_trace_csv(is);
    REQUIRE(steps.size() == trace.steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        CHECK(steps[i].n == trace.steps[i].n);
        CHECK(steps[i].m == trace.steps[i].m);
        CHECK(steps[i].b == trace.steps[i].b);
        CHECK(steps[i].width == trace.steps[i].width);
        CHECK(steps[i].r == trace.steps[i].r);
        CHECK(steps[i].fired_rm == trace.steps[i].fired_rm);
    }
}
