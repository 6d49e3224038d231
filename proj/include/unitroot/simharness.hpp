#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unitroot/adf.hpp"
#include "unitroot/core.hpp"
#include "unitroot/missingness.hpp"

namespace unitroot {

enum class Method {
    cc, mean, locf, intl, ints, kalman, mice,
    mlen, mlens, mleem, ssm
};

Method parse_method(const std::string& name);
std::string method_name(Method m);

// AR(1) sample path: y_0 = 0, y_t = rho y_{t-1} + sigma eps_t with standard
// normal innovations; deterministic per seed.
Series gen_ar1(std::size_t T, double rho, double sigma, std::uint64_t seed);

// Grid for the Monte-Carlo study.  Every replication of every cell draws
// its innovations, its mask, and any method randomness from seeds derived
// deterministically from (base_seed, stream tag, rho, mechanism, rate,
// replication index).  Masks are shared across methods within a replication
// (paired comparison) and none of the streams depend on delta, so
// sensitivity sweeps see a fixed ensemble.
struct SimGrid {
    std::size_t T = 500;
    std::vector<double> rhos = {0.5, 0.9, 0.95, 1.0};
    std::vector<Mechanism> mechanisms = {Mechanism::mcar, Mechanism::mar, Mechanism::mnar_d};
    std::vector<double> rates = {0.3, 0.5, 0.7};
    std::vector<Method> methods = {Method::cc, Method::mean, Method::locf, Method::intl,
                                   Method::ints, Method::kalman, Method::mice, Method::mlen,
                                   Method::mlens, Method::mleem, Method::ssm};
    std::size_t replications = 2000;
    std::vector<double> deltas = {0.05, 0.1, 0.2, 0.3};
    double alpha = 0.05;
    std::uint64_t base_seed = 20240501;
    // Keep the per-replication statistics in the cell result (and its JSON).
    bool keep_replicates = false;
    // Deterministic terms of the Dickey-Fuller regression applied to
    // completed series (and, at reduced/nominal lengths, to CC and the MLE
    // statistics' reference tables).
    RegressionSpec regression = {true, true, 0};
};

struct CellKey {
    double rho;
    Mechanism mechanism;
    double rate;
    Method method;

    std::string label() const;
};

struct CellResult {
    CellKey key;
    std::size_t replications = 0;  // attempted
    std::size_t failures = 0;      // excluded from the denominator
    double rejection_rate = kNaN;
    double mean_rho_hat = kNaN;
    double sd_rho_hat = kNaN;
    double median_p = kNaN;
    double median_statistic = kNaN;
    // (level, value) pairs at 0.05/0.25/0.5/0.75/0.95.
    std::vector<std::pair<double, double>> statistic_quantiles;
    bool unusable = false;  // failure fraction above 10%
    std::vector<std::string> failure_reasons;  // first few, deduplicated
    std::vector<double> replicate_statistics;  // only when keep_replicates

    std::string to_json() const;
    static CellResult from_json(const std::string& text);
};

// Sensitivity cell: one (method in {mleem, ssm}, mechanism, rate, rho,
// delta) combination evaluated on the same ensemble as the delta = 0 run.
struct SensitivityResult {
    CellKey key;
    double delta = 0.0;
    std::size_t replications = 0;
    std::size_t failures = 0;
    double rejection_rate = kNaN;
    double median_p = kNaN;
    double mean_rho_hat = kNaN;

    std::string to_json() const;
};

// Runs one cell.  `tables` must cover the nominal length and plausible
// complete-case counts.  The OpenMP version parallelizes over replications;
// the serial version is the reference the parallel one must match
// bit-for-bit.
CellResult run_cell(const SimGrid& grid, const CellKey& key, const TableSet& tables);
CellResult run_cell_serial(const SimGrid& grid, const CellKey& key, const TableSet& tables);

SensitivityResult run_sensitivity_cell(const SimGrid& grid, const CellKey& key,
                                       double delta, const TableSet& tables);

// Runs every cell in the grid plus one complete-data (rate 0) complete-case
// cell per rho, writing one JSON file per cell into `out_dir` (skipping
// cells whose file already exists, making long runs resumable) and the
// combined outputs at the end.  `progress` (optional) is called after each
// cell.
void run_grid(const SimGrid& grid, const TableSet& tables, const std::string& out_dir,
              const std::function<void(const CellResult&)>& progress = nullptr);

// Combined long-format CSV of all cell files present in `out_dir`.
void write_grid_csv(const std::string& out_dir, const std::string& csv_path);

// Rejection-rate table pivoted like the study summary: one row per
// (mechanism, rho, rate), one column per method; rate-0 rows appear once
// per (mechanism, rho).  `format` is "csv" or "json".
void emit_table(const std::string& out_dir, const std::string& path,
                const std::string& format);

}  // namespace unitroot
