#pragma once

#include <array>
#include <string>
#include <vector>

#include "unitroot/core.hpp"
#include "unitroot/rng.hpp"

namespace unitroot {

enum class Mechanism { mcar, mar, mnar_d, mnar_t, mnar_p, mnar_h };

Mechanism parse_mechanism(const std::string& name);
std::string mechanism_name(Mechanism m);

// Each generator returns the observation mask (true = observed) for the
// given values and target missing rate.
//
// MCAR:    iid Bernoulli(rate) missingness.
// MAR:     p_t = min(c (t+1), 1) increasing in time; c calibrated by
//          bisection so the mean probability equals `rate` (the closed form
//          c = 2 rate / (T+1) holds only while no p_t clips at 1).
// MNAR-D:  deterministic: the ceil(rate * T) largest values are missing
//          (ties broken by earlier index missing first).
// MNAR-T:  p_t = logistic(c * s_t * y_t) with s_t = ((t+1)/T)^2; c
//          calibrated per series by bisection to expected rate within 0.005.
// MNAR-P:  three equal probability strata by value tercile, base
//          probabilities (0.4, 0.1, 0) scaled to the target rate with
//          clipping at 1 and redistribution of the excess to the next
//          stratum.
// MNAR-H:  MNAR-P plus a fully-missing top stratum of width
//          w0 = (6 rate - 1) / 5; requires rate >= 1/6.
std::vector<bool> gen_mcar(std::size_t T, double rate, Rng& rng);
std::vector<bool> gen_mar(std::size_t T, double rate, Rng& rng);
std::vector<bool> gen_mnar_d(const std::vector<double>& y, double rate);
std::vector<bool> gen_mnar_t(const std::vector<double>& y, double rate, Rng& rng);
std::vector<bool> gen_mnar_p(const std::vector<double>& y, double rate, Rng& rng);
std::vector<bool> gen_mnar_h(const std::vector<double>& y, double rate, Rng& rng);

// Unified entry point used by the simulation harness.
std::vector<bool> generate_mask(Mechanism m, const std::vector<double>& y,
                                double rate, Rng& rng);

// MAR slope coefficient for a given T/rate (exposed for testing): bisection
// on c so that mean_t min(c (t+1), 1) == rate.
double mar_coefficient(std::size_t T, double rate);

// MNAR-P stratum probabilities after scaling/clipping (exposed for testing).
// Returns probabilities for (top, middle, bottom) value terciles.
std::array<double, 3> mnar_p_probabilities(double rate);

}  // namespace unitroot
