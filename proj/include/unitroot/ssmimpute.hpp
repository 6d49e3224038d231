#pragma once

#include <cstdint>
#include <vector>

#include "unitroot/adf.hpp"
#include "unitroot/core.hpp"
#include "unitroot/mleem.hpp"
#include "unitroot/rng.hpp"

namespace unitroot {

// State-space multiple imputation for unit-root testing.
//
// The series is modeled as an AR(q) regression with intercept,
//   y_t = a + b_1 c_{t-1} + ... + b_q c_{t-q} + e_t,
// fitted against a "lag container" c that holds observed values where
// available and current imputations elsewhere.  Starting from a
// Kalman-filter fill of the missing values (substituted into the lagged
// regressors only, never the outcome), the procedure alternates between
//   (1) estimating (a, b, sigma^2) by least squares over the rows whose
//       outcome y_t is observed, and
//   (2) drawing the missing values jointly from their Gaussian conditional
//       distribution given the observed values under the current model and
//       substituting the draws into the container,
// optionally shifting each substituted value by a peak-shaped multiple of
// delta inside every gap (multipliers rise 1, 2, ... to the middle of the
// gap and fall symmetrically back to 1).  After the loop, M coefficient
// vectors are drawn from the estimation posterior
//   N((a, b), sigma^2 (X'X)^-1),
// each drawn model completes the series as a + sum_j b_j c_{t-j} at the
// missing positions, and the pooled statistic is the (lower) median of the
// M Dickey-Fuller statistics.  The pooled p-value is the p-value of that
// median statistic.  Delta adjustments act during iteration only; the final
// draws inherit their effect through the container.
struct SsmOptions {
    int lag_order = 1;        // q
    int imputations = 5;      // M
    int max_iterations = 200;
    double tol_loglik = 1e-6;  // relative log-likelihood change
    double tol_coef = 1e-4;    // absolute coefficient change
    DeltaSpec delta = {};      // kind none or constant; peak shape
    // Stagnant gaps (constant multiplier 1) are disabled by default because
    // the scheme tends to diverge; enabling this trades the peak shape for
    // a flat multiplier and still aborts on divergence.
    bool stagnant_multipliers = false;
};

struct SsmResult {
    std::vector<double> coefficients;  // intercept first, then lags 1..q
    double sigma2_hat = 0.0;
    double rho_hat = 0.0;  // sum of the lag coefficients
    std::vector<double> pooled_imputation;  // completed series whose
                                            // statistic is the pooled median
    std::vector<double> statistics;         // per-imputation DF statistics,
                                            // sorted ascending
    std::vector<double> loglik_trace;       // per-iteration fit log-likelihood
    std::size_t iterations = 0;
    bool converged = false;
    bool init_fallback = false;   // Kalman init failed; linear interpolation used
    bool loglik_drop = false;     // trace fell by >1% of its range at some step
    bool posterior_clipped = false;  // posterior covariance needed eigen clipping
};

SsmResult ssm_fit(const Series& s, Rng& rng, const SsmOptions& opts = {},
                  const RegressionSpec& spec = {});

TestResult ssm_test(const Series& s, const TableSet& tables, Rng& rng,
                    const SsmOptions& opts = {}, double alpha = 0.05,
                    const RegressionSpec& spec = {});

// Peak multipliers m_t for every position of every gap in the mask; zero at
// observed positions.  For a gap spanning [u, v]: m_t = t - u + 1 up to the
// midpoint u + floor((v-u)/2), then v - t + 1 down to 1 (e.g. 1,2,3,3,2,1
// for a gap of six).
std::vector<double> peak_multipliers(const std::vector<bool>& observed);

}  // namespace unitroot
