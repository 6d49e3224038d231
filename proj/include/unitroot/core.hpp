#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace unitroot {

// A univariate time series with missing observations.  Values at indices
// where observed[t] == false are ignored; by convention they are stored as
// quiet NaN so accidental use surfaces quickly.
struct Series {
    std::vector<double> y;
    std::vector<bool> observed;

    Series() = default;
    explicit Series(std::vector<double> values);
    Series(std::vector<double> values, std::vector<bool> mask);

    std::size_t size() const { return y.size(); }
    std::size_t n_observed() const;
    std::size_t n_missing() const { return size() - n_observed(); }
    bool complete() const { return n_observed() == size(); }

    // Indices (ascending) of observed entries.
    std::vector<std::size_t> observed_indices() const;

    // Observed values concatenated in time order.
    std::vector<double> observed_values() const;
};

// Deterministic components included in the Dickey-Fuller regression.
struct RegressionSpec {
    bool constant = false;
    bool trend = false;
    int lags = 0;  // augmentation lags on the differenced term

    std::string key() const;  // e.g. "nc0", "c0", "ct4"
    static RegressionSpec parse(const std::string& key);

    bool operator==(const RegressionSpec&) const = default;
};

// Outcome of a unit-root test.
struct TestResult {
    double statistic = std::numeric_limits<double>::quiet_NaN();
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double rho_hat = std::numeric_limits<double>::quiet_NaN();
    double sigma2_hat = std::numeric_limits<double>::quiet_NaN();
    // Sample size whose null table the statistic was referred to: the
    // nominal length for imputation-based tests, the observed count for
    // complete-case and MLEN.
    std::size_t effective_obs = 0;
    bool p_clamped = false;  // p fell outside the tabulated range
};

// Error taxonomy: maps onto CLI exit codes (input -> 2, precondition -> 3,
// numerical -> 4).
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sample mean/variance helpers used across modules (variance uses the
// denominator given by `ddof`, e.g. ddof=1 for the unbiased estimator).
double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v, int ddof = 1);

// Skewness and excess kurtosis (moment estimators) for residual diagnostics.
double skewness(const std::vector<double>& v);
double excess_kurtosis(const std::vector<double>& v);

}  // namespace unitroot
