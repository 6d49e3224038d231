#pragma once

#include <vector>

#include "unitroot/adf.hpp"
#include "unitroot/core.hpp"

namespace unitroot {

// Maximum likelihood for an AR(1) observed at an irregular subset of integer
// times.  Writing t_1 < ... < t_n for the observed indices and
// g_k = t_k - t_{k-1} for the gaps, successive observed values satisfy
//   y_{t_k} | y_{t_{k-1}} ~ N(rho^{g_k} y_{t_{k-1}}, sigma^2 V_k),
//   V_k(rho) = sum_{j=1}^{g_k} rho^{2(j-1)}.

// V_k(rho) for a gap of length `gap` (>= 1).
double gap_variance_factor(double rho, std::size_t gap);

// Log-likelihood of the observed values:
//   -(n/2) log(2 pi sigma^2)
//     - sum_{k=2}^{n} [ (1/2) log V_k + r_k^2 / (2 sigma^2 V_k) ],
// with r_k = y_{t_k} - rho^{g_k} y_{t_{k-1}}; the first observed value
// contributes only its share of the normalizer.
double observed_loglik(const Series& s, double rho, double sigma2);

// Closed-form initial estimates from adjacent observed pairs (gap == 1):
//   rho_0 = sum y_{t_k} y_{t_{k-1}} / sum y_{t_{k-1}}^2 over adjacent pairs,
//   sigma^2_0 = mean squared residual of those pairs.
// When no adjacent pair exists, falls back to rho_0 = 1 and the variance of
// observed differences scaled by gap, with `fallback` set.
struct InitialEstimates {
    double rho0;
    double sigma20;
    bool fallback = false;
};
InitialEstimates initial_estimates(const Series& s);

// Nelder-Mead maximization of observed_loglik over (rho, log sigma^2),
// started from initial_estimates.  Simplex scale 0.1, ftol 1e-8, at most
// 2000 iterations.
struct MleResult {
    double rho_hat;
    double sigma2_hat;
    double loglik;
    std::size_t iterations;
    bool converged;
    // Set when rho_hat lands outside [-1.5, 1.5]; the optimizer itself is
    // unconstrained (the unit root must be interior) but such estimates are
    // suspect and worth surfacing to callers.
    bool rho_warning = false;
};
MleResult fit_observed_mle(const Series& s);

// MLEN: the MLE-based statistic normalized by the observed count n,
//   tau = (rho_hat - 1) / sqrt( n sigma2_hat /
//          ( n sum_{k<n} y_{t_k}^2 - (sum_{k<n} y_{t_k})^2 ) ),
// where the sums run over the first n-1 observed values (the "lag" values).
// MLENS scales the statistic by the ratio of nominal length to observed
// count: tau_s = (T / n) * tau.
double mlen_statistic(const Series& s, const MleResult& fit);
double mlens_statistic(const Series& s, const MleResult& fit);

// Full tests: statistic plus p-value from `tables`.  MLEN refers its
// statistic to the table interpolated at the observed count n; MLENS refers
// to the table at the nominal length T.
TestResult mlen_test(const Series& s, const TableSet& tables, double alpha = 0.05);
TestResult mlens_test(const Series& s, const TableSet& tables, double alpha = 0.05);

}  // namespace unitroot
