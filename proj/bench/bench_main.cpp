// Times the replication engine serially vs with the OpenMP schedule and
// verifies that both produce identical summary tables.

#include "rmstop/sim_harness.hpp"

#include <chrono>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

std::string render(const rmstop::StudyResult& result) {
    std::ostringstream os;
    rmstop::emit_table_csv(result, os);
    return os.str();
}

double run_timed(rmstop::StudyConfig cfg, bool parallel, std::string& table_out) {
    cfg.parallel = parallel;
    const auto t0 = std::chrono::steady_clock::now();
    const rmstop::StudyResult result = rmstop::run_study(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    table_out = render(result);
    return std::chrono::duration<double>(t1 - t0).count();
}

} // namespace

int main() {
#ifdef _OPENMP
    std::cout << "openmp threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "openmp: not enabled\n";
#endif
    struct Case {
        int id;
        long reps;
        const char* label;
    };
    const Case cases[] = {
        {1, 300, "bernoulli rare-event"},
        {3, 300, "gaussian calibration"},
        {7, 200, "quasi-martingale perturbations"},
    };
    std::cout << std::left << std::setw(34) << "study" << std::right << std::setw(12) << "serial s"
              << std::setw(12) << "parallel s" << std::setw(10) << "speedup" << std::setw(12)
              << "identical" << "\n";
    bool all_identical = true;
    for (const Case& c : cases) {
        rmstop::StudyConfig cfg = rmstop::default_study_config(c.id, c.reps, 12345);
        std::string serial_table;
        std::string parallel_table;
        const double ts = run_timed(cfg, false, serial_table);
        const double tp = run_timed(cfg, true, parallel_table);
        const bool same = serial_table == parallel_table;
        all_identical = all_identical && same;
        std::cout << std::left << std::setw(34) << c.label << std::right << std::fixed
                  << std::setprecision(3) << std::setw(12) << ts << std::setw(12) << tp
                  << std::setprecision(2) << std::setw(10) << (tp > 0 ? ts / tp : 0.0)
                  << std::setw(12) << (same ? "yes" : "NO") << "\n";
    }
    if (!all_identical) {
        std::cerr << "serial and parallel tables differ\n";
        return 1;
    }
    return 0;
}
