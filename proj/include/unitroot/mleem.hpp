#pragma once

#include "unitroot/adf.hpp"
#include "unitroot/core.hpp"

namespace unitroot {

// Shift applied to imputed values inside a gap for MNAR sensitivity
// analysis.  `none` disables the adjustment; `constant` uses the given
// delta; `truncation` derives delta each iteration from the inverse Mills
// ratio of a normal truncated at threshold lambda:
//   delta_t = sigma_hat * phi(z) / (1 - Phi(z)),
//   z = (lambda - rho_hat * yhat_{t-1}) / sigma_hat.
// The peak shape adds delta on the first half of each gap and subtracts it
// on the second half; the stagnant shape always adds it.
enum class DeltaKind { none, constant, truncation };
enum class DeltaShape { peak, stagnant };

struct DeltaSpec {
    DeltaKind kind = DeltaKind::none;
    double delta = 0.0;   // used when kind == constant
    double lambda = 0.0;  // truncation threshold, used when kind == truncation
    DeltaShape shape = DeltaShape::peak;
};

// Inverse-Mills-ratio adjustment for values truncated to (lambda, inf);
// switches to the asymptotic value lambda - rho*y_prev when the tail
// probability underflows.
double truncation_delta(double lambda, double rho, double sigma, double y_prev);

// EM-style estimation for AR(1) with missing values.
//
// E-step: impute missing values chronologically as yhat_t = rho_hat *
// yhat_{t-1} +- delta_t (peak split: + for positions u .. u + floor((v-u)/2)
// of a gap spanning [u, v], - for the rest).  A gap with no observed
// predecessor is filled backward from the first observed value:
// yhat_{t-1} = yhat_t / rho_hat when |rho_hat| > 0.1, otherwise with the
// first observed value itself.
//
// M-step: OLS of y_t on y_{t-1} through the origin over the completed
// series, sigma2_hat = RSS / (T - 1).
//
// Iterate until |rho change| < tol and relative sigma2 change < tol, or
// max_iter.
struct MleemResult {
    double rho_hat;
    double sigma2_hat;
    std::vector<double> imputed;  // completed series from the final E-step
    std::vector<double> loglik_trace;
    std::size_t iterations;
    bool converged;
};

MleemResult mleem_fit(const Series& s, const DeltaSpec& delta = {},
                      double tol = 1e-6, std::size_t max_iter = 500);

// MLEEM test: Dickey-Fuller statistic of the completed series referred to
// the table at the nominal length T.
TestResult mleem_test(const Series& s, const TableSet& tables, double alpha = 0.05,
                      const DeltaSpec& delta = {}, const RegressionSpec& spec = {});

}  // namespace unitroot
