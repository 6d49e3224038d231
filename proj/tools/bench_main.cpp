// Benchmark of the parallel cell runner against the serial reference.
//
// Both runners must produce bit-identical results: every replication derives
// its own seeds, outcomes land in a pre-sized vector indexed by replication,
// and aggregation happens serially afterwards, so thread scheduling cannot
// change the numbers.  This tool times both paths on a few representative
// cells and verifies the outputs match exactly.
//
// Usage: unitroot_bench [--tables DIR] [--reps N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "unitroot/adf.hpp"
#include "unitroot/simharness.hpp"

using namespace unitroot;

namespace {

double time_run(CellResult (*fn)(const SimGrid&, const CellKey&, const TableSet&),
                const SimGrid& grid, const CellKey& key, const TableSet& tables,
                CellResult* out) {
    const auto t0 = std::chrono::steady_clock::now();
    *out = fn(grid, key, tables);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const CellResult& a, const CellResult& b) {
    if (a.replications != b.replications || a.failures != b.failures) return false;
    auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    if (!same(a.rejection_rate, b.rejection_rate)) return false;
    if (!same(a.mean_rho_hat, b.mean_rho_hat)) return false;
    if (!same(a.median_p, b.median_p)) return false;
    if (!same(a.median_statistic, b.median_statistic)) return false;
    if (a.replicate_statistics.size() != b.replicate_statistics.size()) return false;
    for (std::size_t i = 0; i < a.replicate_statistics.size(); ++i) {
        if (!same(a.replicate_statistics[i], b.replicate_statistics[i])) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::string table_dir = "tables";
    std::size_t reps = 200;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--tables" && i + 1 < argc) {
            table_dir = argv[++i];
        } else if (arg == "--reps" && i + 1 < argc) {
            reps = std::stoul(argv[++i]);
        } else {
            std::cerr << "usage: unitroot_bench [--tables DIR] [--reps N]\n";
            return 2;
        }
    }

    TableSet tables;
    try {
        tables = TableSet::load_dir(table_dir, {true, true, 0});
        if (tables.empty()) throw input_error("no tables");
    } catch (const std::exception&) {
        std::cerr << "error: no ct0 quantile tables in '" << table_dir
                  << "'; build them with `unitroot_cli quantiles`\n";
        return 2;
    }

#ifdef _OPENMP
    std::printf("OpenMP: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("OpenMP: not enabled (parallel runner degenerates to serial)\n");
#endif

    SimGrid grid;
    grid.T = 500;
    grid.replications = reps;
    grid.regression = {true, true, 0};
    grid.keep_replicates = true;

    const std::vector<CellKey> cells = {
        {0.95, Mechanism::mcar, 0.5, Method::locf},
        {0.95, Mechanism::mcar, 0.5, Method::mlen},
        {0.95, Mechanism::mcar, 0.5, Method::mleem},
        {1.0, Mechanism::mnar_d, 0.5, Method::ssm},
    };

    std::printf("%-28s %10s %10s %8s %6s\n", "cell", "serial(s)", "parallel(s)",
                "speedup", "match");
    bool all_match = true;
    for (const CellKey& key : cells) {
        CellResult serial, parallel;
        const double ts = time_run(run_cell_serial, grid, key, tables, &serial);
        const double tp = time_run(run_cell, grid, key, tables, &parallel);
        const bool match = identical(serial, parallel);
        all_match = all_match && match;
        std::printf("%-28s %10.3f %10.3f %7.2fx %6s\n", key.label().c_str(), ts, tp,
                    ts / tp, match ? "yes" : "NO");
    }
    if (!all_match) {
        std::printf("bit-identity violated\n");
        return 1;
    }
    std::printf("parallel and serial runners agree bit-for-bit\n");
    return 0;
}
