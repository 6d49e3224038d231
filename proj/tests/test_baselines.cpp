#include <cmath>
#include <vector>

#include "doctest.h"
#include "unitroot/adf.hpp"
#include "unitroot/baselines.hpp"
#include "unitroot/rng.hpp"
#include "unitroot/simharness.hpp"

using namespace unitroot;

TEST_CASE("mean imputation") {
    const Series s({1.0, kNaN, 3.0, kNaN});
    CHECK(impute_mean(s) == std::vector<double>{1.0, 2.0, 3.0, 2.0});
}

TEST_CASE("LOCF carries forward and backfills a leading gap") {
    const Series s({kNaN, 2.0, kNaN, kNaN, 5.0});
    CHECK(impute_locf(s) == std::vector<double>{2.0, 2.0, 2.0, 2.0, 5.0});
}

TEST_CASE("linear interpolation is exact on a line") {
    const Series s({0.0, kNaN, kNaN, 3.0, kNaN, 5.0});
    const auto z = impute_linear(s);
    CHECK(z[1] == doctest::Approx(1.0));
    CHECK(z[2] == doctest::Approx(2.0));
    CHECK(z[4] == doctest::Approx(4.0));
}

TEST_CASE("linear interpolation extrapolates flat") {
    const Series s({kNaN, 2.0, kNaN, 4.0, kNaN});
    const auto z = impute_linear(s);
    CHECK(z[0] == 2.0);
    CHECK(z[2] == doctest::Approx(3.0));
    CHECK(z[4] == 4.0);
}

TEST_CASE("spline reproduces a cubic through interior gaps") {
    // Natural splines are exact for data from any cubic only between knots
    // with matching boundary curvature; use a gentle cubic and interior gap
    // with loose tolerance, plus exactness on observed points.
    std::vector<double> y(12);
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double x = static_cast<double>(t) / 11.0;
        y[t] = 1.0 + x + 0.5 * x * x;
    }
    std::vector<bool> mask(12, true);
    mask[5] = false;
    mask[6] = false;
    Series s(y, mask);
    const auto z = impute_spline(s);
    CHECK(z[5] == doctest::Approx(y[5]).epsilon(0.01));
    CHECK(z[6] == doctest::Approx(y[6]).epsilon(0.01));
    CHECK(z[0] == y[0]);
    CHECK(z[11] == y[11]);
}

TEST_CASE("spline falls back to linear under four observed points") {
    const Series s({0.0, kNaN, 2.0, kNaN, 4.0});
    const auto z = impute_spline(s);
    CHECK(z[1] == doctest::Approx(1.0));
    CHECK(z[3] == doctest::Approx(3.0));
}

TEST_CASE("Kalman smoother: no-op on complete data, sane in gaps") {
    const Series complete = gen_ar1(60, 0.9, 1.0, 3);
    CHECK(impute_kalman(complete) == complete.y);

    Series path = gen_ar1(200, 0.9, 1.0, 4);
    std::vector<bool> mask(path.size(), true);
    Rng rng(5);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = rng.uniform() > 0.3;
    const Series s(path.y, mask);
    const auto z = impute_kalman(s);
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (s.observed[t]) {
            CHECK(z[t] == s.y[t]);
        } else {
            CHECK(std::isfinite(z[t]));
        }
    }
    // Smoothed fills should track the local level far better than the
    // series scale.
    double err = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (!s.observed[t]) {
            err += std::abs(z[t] - path.y[t]);
            ++count;
        }
    }
    CHECK(count > 0);
    CHECK(err / static_cast<double>(count) < 2.0);
}

TEST_CASE("complete case concatenates observed values") {
    const Series s({1.0, kNaN, 3.0, 4.0, kNaN});
    CHECK(complete_case(s) == std::vector<double>{1.0, 3.0, 4.0});
}

TEST_CASE("MICE produces m complete datasets that vary across imputations") {
    Series path = gen_ar1(150, 0.95, 1.0, 6);
    std::vector<bool> mask(path.size(), true);
    Rng mrng(7);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = mrng.uniform() > 0.4;
    const Series s(path.y, mask);
    MiceOptions opts;
    Rng rng(8);
    const auto imps = impute_mice(s, rng, opts);
    REQUIRE(imps.size() == static_cast<std::size_t>(opts.m));
    for (const auto& z : imps) {
        REQUIRE(z.size() == s.size());
        for (std::size_t t = 0; t < s.size(); ++t) {
            if (s.observed[t]) CHECK(z[t] == s.y[t]);
            CHECK(std::isfinite(z[t]));
        }
    }
    // Across imputations each missing entry should vary (posterior draws).
    bool any_varies = false;
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (s.observed[t]) continue;
        for (std::size_t m = 1; m < imps.size(); ++m) {
            if (imps[m][t] != imps[0][t]) any_varies = true;
        }
    }
    CHECK(any_varies);
}

TEST_CASE("MICE test is deterministic given the seed") {
    Series path = gen_ar1(120, 1.0, 1.0, 9);
    std::vector<bool> mask(path.size(), true);
    Rng mrng(10);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = mrng.uniform() > 0.3;
    const Series s(path.y, mask);
    TableSet tables;
    tables.add(simulate_table({false, false, 0}, 120, 2000, 11));
    Rng r1(12), r2(12);
    const TestResult a = mice_test(s, tables, r1);
    const TestResult b = mice_test(s, tables, r2);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("imputation tests run at nominal length, complete case at n") {
    Series path = gen_ar1(100, 0.9, 1.0, 13);
    std::vector<bool> mask(path.size(), true);
    Rng mrng(14);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = mrng.uniform() > 0.4;
    const Series s(path.y, mask);
    TableSet tables;
    tables.add(simulate_table({false, false, 0}, 40, 1500, 15));
    tables.add(simulate_table({false, false, 0}, 100, 1500, 15));
    CHECK(locf_test(s, tables).effective_obs == s.size());
    CHECK(mean_test(s, tables).effective_obs == s.size());
    CHECK(complete_case_test(s, tables).effective_obs == s.n_observed());
}

TEST_CASE("complete-case test equals plain ADF on complete data") {
    const Series s = gen_ar1(80, 0.7, 1.0, 16);
    TableSet tables;
    tables.add(simulate_table({false, false, 0}, 80, 1500, 17));
    const TestResult cc = complete_case_test(s, tables);
    const TestResult adf = adf_test(s.y, {false, false, 0}, tables);
    CHECK(cc.statistic == adf.statistic);
    CHECK(cc.p_value == adf.p_value);
}

TEST_CASE("baseline preconditions") {
    const Series empty(std::vector<double>{kNaN, kNaN});
    CHECK_THROWS_AS(impute_mean(empty), precondition_error);
    CHECK_THROWS_AS(impute_locf(empty), precondition_error);
    CHECK_THROWS_AS(impute_linear(empty), precondition_error);
}
