#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unitroot/core.hpp"

namespace unitroot {

// Dickey-Fuller t-statistic for a complete series under the given
// deterministic specification.  With no constant, no trend and zero lags this
// reduces to the classic no-constant tau: rho is estimated through the
// origin, sigma^2 = RSS / (T - 2), SE(rho) = sqrt(sigma^2 / sum y_{t-1}^2).
// With augmentation terms the statistic is the t-ratio on the level
// coefficient in the regression of dy_t on y_{t-1} (+ lagged dy, constant,
// trend).
struct DfFit {
    double statistic;
    double rho_hat;     // 1 + coefficient on y_{t-1}
    double sigma2_hat;  // residual variance of the fitted regression
    std::size_t effective_obs;
    std::vector<double> residuals;
};

DfFit df_fit(const std::vector<double>& y, const RegressionSpec& spec = {});

double df_statistic(const std::vector<double>& y, const RegressionSpec& spec = {});

// Empirical null quantiles of the DF statistic for one (spec, T) pair.
struct QuantileTable {
    RegressionSpec spec;
    std::size_t sample_size = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    // Sorted (probability level, quantile) pairs; levels in (0, 1).
    std::vector<std::pair<double, double>> quantiles;

    double quantile(double level) const;  // linear interpolation in level

    std::string to_json() const;
    static QuantileTable from_json(const std::string& text);
};

// A family of tables for one spec across sample sizes, supporting linear
// interpolation in T and p-value lookup.
class TableSet {
  public:
    void add(QuantileTable table);

    bool empty() const { return tables_.empty(); }
    const RegressionSpec& spec() const;
    std::vector<std::size_t> sizes() const;

    // Critical value at significance `alpha` for sample size T, linearly
    // interpolated between bracketing tabulated sizes (clamped outside).
    double critical_value(double alpha, std::size_t T) const;

    // P-value of `stat`: empirical CDF by linear interpolation across the
    // tabulated levels, then linear interpolation in T.  Values outside the
    // tabulated level range are clamped to the extreme levels and flagged.
    double p_value(double stat, std::size_t T, bool* clamped = nullptr) const;

    // Load every `adf_<spec>_T<size>.json` table in a directory matching the
    // requested spec.  Returns an empty set if none are present.
    static TableSet load_dir(const std::string& dir, const RegressionSpec& spec);

    // The set of probability levels tabulated by `simulate_table`.
    static const std::vector<double>& standard_levels();

  private:
    std::map<std::size_t, QuantileTable> tables_;
};

// Monte-Carlo simulation of the DF null distribution: random walks of length
// T driven by iid N(0,1) innovations, statistic recorded per replication.
QuantileTable simulate_table(const RegressionSpec& spec, std::size_t T,
                             std::size_t replications, std::uint64_t seed);

// Full ADF test against a table set (tables must match `spec`).
TestResult adf_test(const std::vector<double>& y, const RegressionSpec& spec,
                    const TableSet& tables, double alpha = 0.05);

}  // namespace unitroot
