#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rmstop/benchmarks.hpp"
#include "rmstop/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace rmstop;

namespace {

std::vector<int> constant_path(long n, int value) { return std::vector<int>(n, value); }

} // namespace

TEST_CASE("sprt config validation") {
    SprtConfig cfg{0.01, 0.005, 0.05, 0.05};
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.lower() < 0.0);
    CHECK(cfg.upper() > 0.0);
    CHECK_THROWS_AS((SprtConfig{0.01, 0.01, 0.05, 0.05}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((SprtConfig{0.005, 0.01, 0.05, 0.05}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((SprtConfig{0.01, 0.005, 1.0, 0.05}).validate(), std::invalid_argument);
}

TEST_CASE("sprt all-failure closed form") {
    CHECK(sprt_all_failure_time({0.01, 0.005, 0.05, 0.05}) == 585);
    CHECK(sprt_all_failure_time({0.005, 0.0025, 0.05, 0.05}) == 1174);
}

TEST_CASE("sprt all-failure run matches the closed form") {
    const SprtConfig cfg{0.01, 0.005, 0.05, 0.05};
    const auto path = constant_path(1000, 0);
    const StopReport rep = sprt_bernoulli_run(path, cfg, 1000);
    CHECK(rep.stopped);
    CHECK(rep.tau == 585);
}

TEST_CASE("sprt closed form equals simulation over a config sweep") {
    // the eight rare-event parameterizations plus random configs
    std::vector<SprtConfig> configs;
    for (double eps : {0.005, 0.01}) {
        configs.push_back({eps, eps / 2.0, 0.05, 0.05});
    }
    Rng rng(404);
    for (int i = 0; i < 20; ++i) {
        const double p0 = 0.002 + 0.2 * rng.uniform();
        const double frac = 0.2 + 0.6 * rng.uniform();
        const double a = 0.01 + 0.1 * rng.uniform();
        const double b = 0.01 + 0.1 * rng.uniform();
        configs.push_back({p0, p0 * frac, a, b});
    }
    for (const SprtConfig& cfg : configs) {
        const long closed = sprt_all_failure_time(cfg);
        const auto path = constant_path(closed + 10, 0);
        const StopReport rep = sprt_bernoulli_run(path, cfg, closed + 10);
        REQUIRE(rep.stopped);
        CHECK(rep.tau == closed);
    }
}

TEST_CASE("sprt all-success path accepts the null") {
    const SprtConfig cfg{0.01, 0.005, 0.05, 0.05};
    const auto path = constant_path(5000, 1);
    const StopReport rep = sprt_bernoulli_run(path, cfg, 5000);
    CHECK_FALSE(rep.stopped);
}

TEST_CASE("poisson sprt all-zero path") {
    const std::vector<long> path(700, 0);
    const StopReport rep = sprt_poisson_run(path, 0.01, 0.005, 0.05, 0.05, 700);
    CHECK(rep.stopped);
    CHECK(rep.tau == 589);
}

TEST_CASE("poisson sprt event pushes the ratio down") {
    std::vector<long> path(10, 0);
    path[0] = 1;
    const StopReport rep = sprt_poisson_run(path, 0.01, 0.005, 0.05, 0.05, 10);
    CHECK_FALSE(rep.stopped);
    // one event contributes log(1/2) < 0 on top of the positive drift
    CHECK(rep.m_at_tau != rep.m_at_tau); // NaN: no stop recorded
}

TEST_CASE("poisson sprt rejects degenerate rates") {
    const std::vector<long> path(10, 0);
    CHECK_THROWS_AS(sprt_poisson_run(path, 0.01, 0.01, 0.05, 0.05, 10), std::invalid_argument);
}

TEST_CASE("cusum never fires on the reference-value path") {
    const std::vector<double> path(2000, 0.025);
    const StopReport rep = cusum_normal_run(path, 0.025, 3.0, 2000);
    CHECK_FALSE(rep.stopped);
}

TEST_CASE("cusum deterministic drift crosses at n = 11") {
    // dyadic k, h, and increment keep the accumulation exact: S_10 == h is
    // not a crossing, the first n with n * h/10 > h is 11
    const double k = 0.5;
    const double h = 1.25;
    const std::vector<double> path(100, k + h / 10.0);
    const StopReport rep = cusum_normal_run(path, k, h, 100);
    CHECK(rep.stopped);
    CHECK(rep.tau == 11);
}

TEST_CASE("cusum statistic is nonnegative and monotone in the path") {
    Rng rng(8);
    std::vector<double> base(300);
    for (double& x : base) x = rng.normal();
    std::vector<double> bigger = base;
    for (double& x : bigger) x += 0.3;
    double s_base = 0.0;
    double s_big = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        s_base = std::max(0.0, s_base + base[i] - 0.025);
        s_big = std::max(0.0, s_big + bigger[i] - 0.025);
        CHECK(s_base >= 0.0);
        CHECK(s_big >= s_base);
    }
}

TEST_CASE("poisson cusum basics") {
    const std::vector<long> zeros(500, 0);
    CHECK_FALSE(cusum_poisson_run(zeros, 0.01, 0.02, 1.0, 500).stopped);
    // single event contributes log 2 when lambda1 = 2 lambda0
    std::vector<long> one(1, 1);
    const StopReport rep = cusum_poisson_run(one, 0.01, 0.02, std::log(2.0) - 0.02, 1);
    CHECK(rep.stopped);
    CHECK(rep.tau == 1);
    CHECK_THROWS_AS(cusum_poisson_run(zeros, 0.02, 0.01, 1.0, 500), std::invalid_argument);
}

TEST_CASE("cusum calibration hits the target ARL and is deterministic") {
    CusumModel model;
    model.kind = CusumModel::Kind::normal;
    model.k = 0.025;
    const CalibrationResult a = calibrate_cusum_threshold(model, 500.0, 1500, 1);
    const CalibrationResult b = calibrate_cusum_threshold(model, 500.0, 1500, 1);
    CHECK(a.h == b.h);
    CHECK(a.within_tolerance);
    CHECK(std::fabs(a.estimated_arl - 500.0) <= 25.0);

    // independent re-estimate of the in-control mean run length at the found h
    const long runs = 4000;
    const long cap = 25000;
    double total = 0.0;
    for (long j = 0; j < runs; ++j) {
        Rng rng(derive_seed(777, static_cast<std::uint64_t>(j)));
        double s = 0.0;
        long n = 0;
        while (n < cap) {
            ++n;
            s = std::max(0.0, s + rng.normal() - model.k);
            if (s > a.h) break;
        }
        total += static_cast<double>(n);
    }
    const double arl = total / static_cast<double>(runs);
    CHECK(std::fabs(arl - 500.0) / 500.0 <= 0.10);
}

TEST_CASE("cusum calibration trace is monotone in h") {
    CusumModel model;
    model.kind = CusumModel::Kind::normal;
    model.k = 0.025;
    const CalibrationResult cal = calibrate_cusum_threshold(model, 100.0, 800, 3);
    auto trace = cal.trace;
    std::sort(trace.begin(), trace.end());
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i].second >= trace[i - 1].second);
    }
}

TEST_CASE("poisson cusum calibration lands on a run-length shelf") {
    // With rare events the increments live on a lattice (one event adds
    // log 2, each step drains lambda0), so the in-control ARL is a step
    // function of h and the exact target may be unattainable.
    CusumModel model;
    model.kind = CusumModel::Kind::poisson;
    model.lambda0 = 0.005;
    model.lambda1 = 0.010;
    const CalibrationResult cal = calibrate_cusum_threshold(model, 500.0, 1200, 2);
    CHECK(cal.h > 0.0);
    CHECK(cal.estimated_arl > 100.0);
    CHECK(cal.estimated_arl < 1000.0);
    const CalibrationResult again = calibrate_cusum_threshold(model, 500.0, 1200, 2);
    CHECK(cal.h == again.h);
}

TEST_CASE("cusum calibration with a loose target exercises the small-h bracket") {
    CusumModel model;
    model.kind = CusumModel::Kind::normal;
    model.k = 0.025;
    const CalibrationResult cal = calibrate_cusum_threshold(model, 2.0, 500, 5);
    CHECK(cal.h < 2.0);
    CHECK(std::fabs(cal.estimated_arl - 2.0) <= 0.1);
}
