#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "unitroot/obslik.hpp"
#include "unitroot/rng.hpp"
#include "unitroot/simharness.hpp"

using namespace unitroot;

namespace {

// Joint-Gaussian oracle: condition on the first observed value, build the
// covariance of all later time points from the one-step recursion, drop the
// missing rows/columns (marginalization), and evaluate the multivariate
// normal log-density of the remaining observed values.  The library's
// likelihood assigns the first observed point a bare normalizer share, so it
// equals this oracle minus (1/2) log(2 pi sigma^2).
double mvn_oracle(const Series& s, double rho, double sigma2) {
    const auto idx = s.observed_indices();
    const std::size_t t0 = idx.front();
    const std::size_t m = s.size() - t0 - 1;  // time points after the anchor
    if (idx.size() < 2) return 0.0;
    Eigen::VectorXd mu(static_cast<Eigen::Index>(m));
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = 1; j <= m; ++j) {
        mu(static_cast<Eigen::Index>(j - 1)) = std::pow(rho, static_cast<double>(j)) *
                                               s.y[t0];
        for (std::size_t k = 1; k <= m; ++k) {
            // Cov(y_{t0+j}, y_{t0+k} | y_{t0}) = sigma^2 sum_{i=1}^{min(j,k)}
            // rho^{(j-i)+(k-i)}.
            double c = 0.0;
            for (std::size_t i = 1; i <= std::min(j, k); ++i) {
                c += std::pow(rho, static_cast<double>(j - i)) *
                     std::pow(rho, static_cast<double>(k - i));
            }
            cov(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(k - 1)) =
                sigma2 * c;
        }
    }
    std::vector<Eigen::Index> keep;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        keep.push_back(static_cast<Eigen::Index>(idx[k] - t0 - 1));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(keep.size());
    Eigen::VectorXd mu_o(n), y_o(n);
    Eigen::MatrixXd cov_o(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        mu_o(a) = mu(keep[static_cast<std::size_t>(a)]);
        y_o(a) = s.y[idx[static_cast<std::size_t>(a) + 1]];
        for (Eigen::Index b = 0; b < n; ++b) {
            cov_o(a, b) = cov(keep[static_cast<std::size_t>(a)],
                              keep[static_cast<std::size_t>(b)]);
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov_o);
    const Eigen::VectorXd d = y_o - mu_o;
    const Eigen::VectorXd z = llt.matrixL().solve(d);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * static_cast<double>(n) * std::log(2.0 * M_PI) - 0.5 * logdet -
           0.5 * z.squaredNorm();
}

}  // namespace

TEST_CASE("gap variance factor") {
    CHECK(gap_variance_factor(0.7, 1) == 1.0);
    CHECK(gap_variance_factor(1.0, 5) == 5.0);
    CHECK(gap_variance_factor(-1.0, 4) == 4.0);
    // 1 + 0.25 + 0.0625
    CHECK(gap_variance_factor(0.5, 3) == doctest::Approx(1.3125).epsilon(1e-14));
    CHECK(gap_variance_factor(0.9, 2) == doctest::Approx(1.81).epsilon(1e-12));
}

TEST_CASE("observed likelihood equals the complete-data form on complete series") {
    const Series s = gen_ar1(60, 0.85, 1.0, 5);
    for (double rho : {0.3, 0.85, 1.0}) {
        for (double sigma2 : {0.5, 1.0, 2.0}) {
            const std::size_t T = s.size();
            double ll = -0.5 * static_cast<double>(T) * std::log(2.0 * M_PI * sigma2);
            for (std::size_t t = 1; t < T; ++t) {
                const double r = s.y[t] - rho * s.y[t - 1];
                ll -= r * r / (2.0 * sigma2);
            }
            CHECK(observed_loglik(s, rho, sigma2) == doctest::Approx(ll).epsilon(1e-13));
        }
    }
}

TEST_CASE("observed likelihood equals the joint-Gaussian oracle on gappy series") {
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const double rho = (rep % 4 == 0) ? 1.0 : 0.3 + 0.8 * rng.uniform();
        const double sigma2 = 0.4 + 1.2 * rng.uniform();
        Series path = gen_ar1(10, rho, 1.0, 600 + static_cast<std::uint64_t>(rep));
        std::vector<bool> mask(10, false);
        std::size_t n = 0;
        while (n < 3) {
            n = 0;
            for (std::size_t i = 0; i < mask.size(); ++i) {
                mask[i] = rng.uniform() < 0.6;
                n += mask[i];
            }
        }
        const Series s(path.y, mask);
        const double expect = mvn_oracle(s, rho, sigma2) -
                              0.5 * std::log(2.0 * M_PI * sigma2);
        CAPTURE(rep);
        CHECK(observed_loglik(s, rho, sigma2) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("initial estimates use adjacent pairs and raw first differences") {
    // Observed: 1, _, 3, 6.  Only (3, 6) is adjacent: rho0 = 18/9 = 2;
    // sigma2_0 is the mean squared difference over adjacent pairs: (6-3)^2.
    const Series s({1.0, kNaN, 3.0, 6.0});
    const InitialEstimates init = initial_estimates(s);
    CHECK(!init.fallback);
    CHECK(init.rho0 == doctest::Approx(2.0));
    CHECK(init.sigma20 == doctest::Approx(9.0));
}

TEST_CASE("initial estimates fall back when no adjacent pair exists") {
    const Series s({1.0, kNaN, 2.0, kNaN, 4.0});
    const InitialEstimates init = initial_estimates(s);
    CHECK(init.fallback);
    CHECK(init.rho0 == 1.0);
    CHECK(init.sigma20 > 0.0);
}

TEST_CASE("numeric MLE matches the analytic optimum on complete data") {
    // On complete data the likelihood is the conditional AR(1) likelihood:
    // rho maximizer is through-origin OLS and sigma2 = RSS / n.
    const Series s = gen_ar1(300, 0.9, 1.0, 21);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 1; t < s.size(); ++t) {
        num += s.y[t] * s.y[t - 1];
        den += s.y[t - 1] * s.y[t - 1];
    }
    const double rho_ols = num / den;
    double rss = 0.0;
    for (std::size_t t = 1; t < s.size(); ++t) {
        const double r = s.y[t] - rho_ols * s.y[t - 1];
        rss += r * r;
    }
    const MleResult fit = fit_observed_mle(s);
    CHECK(fit.converged);
    CHECK(fit.rho_hat == doctest::Approx(rho_ols).epsilon(1e-4));
    CHECK(fit.sigma2_hat ==
          doctest::Approx(rss / static_cast<double>(s.size())).epsilon(1e-3));
}

TEST_CASE("numeric MLE recovers parameters through gaps") {
    Series path = gen_ar1(400, 0.95, 1.0, 33);
    std::vector<bool> mask(path.size(), true);
    Rng rng(34);
    for (std::size_t i = 1; i + 1 < mask.size(); ++i) mask[i] = rng.uniform() > 0.4;
    const Series s(path.y, mask);
    const MleResult fit = fit_observed_mle(s);
    CHECK(fit.converged);
    CHECK(fit.rho_hat == doctest::Approx(0.95).epsilon(0.05));
    CHECK(fit.sigma2_hat == doctest::Approx(1.0).epsilon(0.35));
    CHECK(!fit.rho_warning);
}

TEST_CASE("MLEN statistic formula") {
    const Series s({1.0, 2.0, kNaN, 1.5, 2.5});  // observed n = 4
    const MleResult fit = fit_observed_mle(s);
    const auto obs = s.observed_values();
    // Sums over the first n-1 observed values.
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
        sum += obs[i];
        sum2 += obs[i] * obs[i];
    }
    const double n = static_cast<double>(obs.size());
    const double se = std::sqrt(n * fit.sigma2_hat / (n * sum2 - sum * sum));
    CHECK(mlen_statistic(s, fit) == doctest::Approx((fit.rho_hat - 1.0) / se));
    CHECK(mlens_statistic(s, fit) ==
          doctest::Approx((5.0 / 4.0) * mlen_statistic(s, fit)));
}

TEST_CASE("MLE preconditions") {
    CHECK_THROWS_AS(fit_observed_mle(Series({1.0, kNaN, kNaN})), precondition_error);
    MleResult fake;
    fake.rho_hat = 1.0;
    fake.sigma2_hat = 1.0;
    // The conservative statistic needs at least three observed values.
    CHECK_THROWS_AS(mlen_statistic(Series({1.0, kNaN, 2.0}), fake), precondition_error);
}
