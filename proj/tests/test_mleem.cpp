#include <cmath>
#include <vector>

#include "doctest.h"
#include "unitroot/mleem.hpp"
#include "unitroot/rng.hpp"
#include "unitroot/simharness.hpp"

using namespace unitroot;

TEST_CASE("truncation delta oracle values") {
    // z = 0: sigma * phi(0) / (1 - Phi(0)) = sigma * 0.3989.. / 0.5.
    CHECK(truncation_delta(0.0, 1.0, 2.0, 0.0) ==
          doctest::Approx(2.0 * 0.7978845608028654).epsilon(1e-12));
    // z = 3: phi(3) / (1 - Phi(3)) = 3.2831...
    CHECK(truncation_delta(3.0, 1.0, 1.0, 0.0) ==
          doctest::Approx(3.283098654930434).epsilon(1e-9));
    // Deep tail: the Mills ratio times sigma approaches lambda - rho y_prev.
    CHECK(truncation_delta(9.0, 1.0, 1.0, 0.0) == doctest::Approx(9.0).epsilon(1e-3));
    CHECK_THROWS_AS(truncation_delta(0.0, 1.0, 0.0, 0.0), precondition_error);
}

TEST_CASE("MLEEM single iteration is exact") {
    // Observed 1, _, 4, _, 16.  No adjacent observed pair, so the starting
    // value is rho = 1; the E-step fills 1, 1, 4, 4, 16 and the M-step gives
    // rho = (1 + 4 + 16 + 64) / (1 + 1 + 16 + 16) = 5/2.
    const Series s({1.0, kNaN, 4.0, kNaN, 16.0});
    const MleemResult fit = mleem_fit(s, {}, 1e-6, 1);
    CHECK(fit.rho_hat == 2.5);
    CHECK(fit.imputed == std::vector<double>{1.0, 1.0, 4.0, 4.0, 16.0});
    CHECK(fit.iterations == 1);
}

TEST_CASE("MLEEM fixed point on a geometric series") {
    // The same series iterated to the cap: the EM map here is
    // rho -> 5 rho / (1 + rho^2), whose stable fixed point is 2, so the gaps
    // converge to the geometric bridge 2, 8.  (The noiseless series drives
    // sigma2 to zero, so the variance-change criterion never triggers and
    // the fit runs to the iteration cap without setting `converged`.)
    const Series s({1.0, kNaN, 4.0, kNaN, 16.0});
    const MleemResult fit = mleem_fit(s);
    CHECK(fit.rho_hat == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.imputed[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.imputed[3] == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(fit.imputed[0] == 1.0);
    CHECK(fit.imputed[4] == 16.0);
}

TEST_CASE("MLEEM leaves complete data at the OLS solution") {
    const Series s = gen_ar1(100, 0.9, 1.0, 1);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 1; t < s.size(); ++t) {
        num += s.y[t] * s.y[t - 1];
        den += s.y[t - 1] * s.y[t - 1];
    }
    const MleemResult fit = mleem_fit(s);
    CHECK(fit.rho_hat == num / den);  // exact: the E-step is a no-op
    CHECK(fit.imputed == s.y);
}

TEST_CASE("peak delta signs rise then fall across a gap") {
    // Gap spans indices 1..4 (u = 1, v = 4, half = 2): signs +, +, -, -.
    std::vector<double> y = {1.0, kNaN, kNaN, kNaN, kNaN, 1.0, 1.1, 0.9, 1.0, 1.05};
    const Series s(y);
    DeltaSpec d;
    d.kind = DeltaKind::constant;
    d.delta = 0.25;
    d.shape = DeltaShape::peak;
    const MleemResult fit = mleem_fit(s, d);
    const double rho = fit.rho_hat;
    // Reconstruct the final E-step from the converged parameters.
    const double z1 = rho * 1.0 + 0.25;
    const double z2 = rho * z1 + 0.25;
    const double z3 = rho * z2 - 0.25;
    const double z4 = rho * z3 - 0.25;
    CHECK(fit.imputed[1] == doctest::Approx(z1).epsilon(1e-4));
    CHECK(fit.imputed[2] == doctest::Approx(z2).epsilon(1e-4));
    CHECK(fit.imputed[3] == doctest::Approx(z3).epsilon(1e-4));
    CHECK(fit.imputed[4] == doctest::Approx(z4).epsilon(1e-4));
}

TEST_CASE("stagnant delta always adds") {
    std::vector<double> y = {1.0, kNaN, kNaN, 1.0, 1.1, 0.9, 1.0, 1.05, 0.95, 1.0};
    const Series s(y);
    DeltaSpec d;
    d.kind = DeltaKind::constant;
    d.delta = 0.25;
    d.shape = DeltaShape::stagnant;
    const MleemResult fit = mleem_fit(s, d);
    const double rho = fit.rho_hat;
    CHECK(fit.imputed[1] == doctest::Approx(rho * 1.0 + 0.25).epsilon(1e-4));
    CHECK(fit.imputed[2] == doctest::Approx(rho * fit.imputed[1] + 0.25).epsilon(1e-4));
}

TEST_CASE("zero constant delta matches no delta") {
    Series path = gen_ar1(80, 0.9, 1.0, 9);
    std::vector<bool> mask(path.size(), true);
    Rng rng(10);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = rng.uniform() > 0.3;
    const Series s(path.y, mask);
    DeltaSpec zero;
    zero.kind = DeltaKind::constant;
    zero.delta = 0.0;
    const MleemResult a = mleem_fit(s);
    const MleemResult b = mleem_fit(s, zero);
    CHECK(a.rho_hat == b.rho_hat);
    CHECK(a.imputed == b.imputed);
}

TEST_CASE("leading gap fills backward through rho") {
    std::vector<double> y = {kNaN, kNaN, 4.0, 3.7, 3.4, 3.2, 2.9, 2.7, 2.5, 2.3};
    const Series s(y);
    const MleemResult fit = mleem_fit(s);
    CHECK(std::abs(fit.rho_hat) > 0.1);
    // Backward fill from the first observed value: z[1] = z[2]/rho, then
    // z[0] = z[1]/rho, using the last iterate's rho (equal to the final one
    // to convergence tolerance).
    CHECK(fit.imputed[1] == doctest::Approx(4.0 / fit.rho_hat).epsilon(1e-3));
    CHECK(fit.imputed[0] == doctest::Approx(fit.imputed[1] / fit.rho_hat).epsilon(1e-3));
}

TEST_CASE("MLEEM estimates rho under unit root with missing values") {
    Series path = gen_ar1(400, 1.0, 1.0, 44);
    std::vector<bool> mask(path.size(), true);
    Rng rng(45);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = rng.uniform() > 0.5;
    const Series s(path.y, mask);
    const MleemResult fit = mleem_fit(s);
    CHECK(fit.converged);
    CHECK(fit.rho_hat == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("MLEEM preconditions") {
    CHECK_THROWS_AS(mleem_fit(Series({1.0, kNaN, 2.0})), precondition_error);
}
