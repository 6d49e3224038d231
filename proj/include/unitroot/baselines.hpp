#pragma once

#include "unitroot/adf.hpp"
#include "unitroot/core.hpp"
#include "unitroot/rng.hpp"

namespace unitroot {

// Single-imputation baselines.  Each returns a completed series of the same
// length; preconditions (at least one observed value, etc.) throw
// precondition_error.

// Every missing value replaced by the mean of the observed values.
std::vector<double> impute_mean(const Series& s);

// Last observation carried forward; a leading gap is filled backward from
// the first observed value.
std::vector<double> impute_locf(const Series& s);

// Linear interpolation between the nearest observed neighbors; flat
// extrapolation beyond the first/last observed value.
std::vector<double> impute_linear(const Series& s);

// Natural cubic spline through the observed points (falls back to linear
// when fewer than four points are observed); flat extrapolation at the ends.
std::vector<double> impute_spline(const Series& s);

// Kalman smoothing imputation: fit a local-level AR(1) structural model
//   y_t = x_t + measurement noise,  x_t = phi x_{t-1} + innovation
// by maximum likelihood on the observed values, then replace missing values
// with the smoothed state means.
std::vector<double> impute_kalman(const Series& s);

// Complete-case reduction: observed values concatenated in time order.
std::vector<double> complete_case(const Series& s);

// Multiple imputation by chained equations with covariates (y_{t-1}, t):
// Bayesian linear regression draws, linear-interpolation start, `burnin`
// cycles per imputation, m completed datasets.
struct MiceOptions {
    int m = 5;
    int burnin = 10;
};
std::vector<std::vector<double>> impute_mice(const Series& s, Rng& rng,
                                             const MiceOptions& opts = {});

// Tests: completed-series methods run the DF regression at nominal length;
// the complete-case test refers its statistic to the table interpolated at
// the observed count; MICE pools by the (lower) median statistic.
TestResult mean_test(const Series& s, const TableSet& t, double alpha = 0.05, const RegressionSpec& spec = {});
TestResult locf_test(const Series& s, const TableSet& t, double alpha = 0.05, const RegressionSpec& spec = {});
TestResult linear_test(const Series& s, const TableSet& t, double alpha = 0.05, const RegressionSpec& spec = {});
TestResult spline_test(const Series& s, const TableSet& t, double alpha = 0.05, const RegressionSpec& spec = {});
TestResult kalman_test(const Series& s, const TableSet& t, double alpha = 0.05, const RegressionSpec& spec = {});
TestResult complete_case_test(const Series& s, const TableSet& t, double alpha = 0.05, const RegressionSpec& spec = {});
TestResult mice_test(const Series& s, const TableSet& t, Rng& rng, double alpha = 0.05,
                     const MiceOptions& opts = {}, const RegressionSpec& spec = {});

}  // namespace unitroot
