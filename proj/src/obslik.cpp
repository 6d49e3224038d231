#include "unitroot/obslik.hpp"

#include <algorithm>
#include <cmath>

#include "nelder_mead.hpp"

namespace unitroot {

double gap_variance_factor(double rho, std::size_t gap) {
    if (gap == 0) throw precondition_error("gap must be at least 1");
    const double r2 = rho * rho;
    if (std::abs(r2 - 1.0) < 1e-12) return static_cast<double>(gap);
    return (1.0 - std::pow(r2, static_cast<double>(gap))) / (1.0 - r2);
}

double observed_loglik(const Series& s, double rho, double sigma2) {
    if (!(sigma2 > 0.0)) throw precondition_error("sigma2 must be positive");
    const auto idx = s.observed_indices();
    const std::size_t n = idx.size();
    if (n < 2) throw precondition_error("need at least two observed values");

    double ll = -0.5 * static_cast<double>(n) * std::log(2.0 * M_PI * sigma2);
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t gap = idx[k] - idx[k - 1];
        const double v = gap_variance_factor(rho, gap);
        const double mean = std::pow(rho, static_cast<double>(gap)) * s.y[idx[k - 1]];
        const double r = s.y[idx[k]] - mean;
        ll -= 0.5 * (std::log(v) + r * r / (sigma2 * v));
    }
    return ll;
}

InitialEstimates initial_estimates(const Series& s) {
    const auto idx = s.observed_indices();
    if (idx.size() < 2) throw precondition_error("need at least two observed values");

    double num = 0.0, den = 0.0;
    std::vector<std::pair<double, double>> adjacent;  // (lag value, value)
    for (std::size_t k = 1; k < idx.size(); ++k) {
        if (idx[k] - idx[k - 1] == 1) {
            const double x = s.y[idx[k - 1]];
            const double v = s.y[idx[k]];
            num += v * x;
            den += x * x;
            adjacent.emplace_back(x, v);
        }
    }

    InitialEstimates init;
    if (!adjacent.empty() && den > 0.0) {
        init.rho0 = num / den;
        double ss = 0.0;
        for (const auto& [x, v] : adjacent) {
            const double d = v - x;
            ss += d * d;
        }
        init.sigma20 = ss / static_cast<double>(adjacent.size());
    } else {
        // No adjacent observed pair: start at the unit root and scale each
        // squared difference by its gap length.
        init.fallback = true;
        init.rho0 = 1.0;
        double ss = 0.0;
        for (std::size_t k = 1; k < idx.size(); ++k) {
            const double d = s.y[idx[k]] - s.y[idx[k - 1]];
            ss += d * d / static_cast<double>(idx[k] - idx[k - 1]);
        }
        init.sigma20 = ss / static_cast<double>(idx.size() - 1);
    }
    if (!(init.sigma20 > 0.0)) init.sigma20 = 1e-8;
    return init;
}

MleResult fit_observed_mle(const Series& s) {
    const InitialEstimates init = initial_estimates(s);
    auto neg_ll = [&](const std::vector<double>& x) {
        const double rho = x[0];
        const double sigma2 = std::exp(x[1]);
        if (!std::isfinite(rho) || std::abs(rho) > 5.0 || !(sigma2 > 0.0) ||
            !std::isfinite(sigma2)) {
            return 1e100;
        }
        const double ll = observed_loglik(s, rho, sigma2);
        return std::isfinite(ll) ? -ll : 1e100;
    };

    const auto nm = detail::nelder_mead(neg_ll, {init.rho0, std::log(init.sigma20)},
                                        0.1, 1e-8, 2000);

    MleResult r;
    r.rho_hat = nm.x[0];
    r.sigma2_hat = std::exp(nm.x[1]);
    r.loglik = -nm.fmin;
    r.iterations = nm.iterations;
    r.converged = nm.converged;
    r.rho_warning = std::abs(r.rho_hat) > 1.5;
    if (!std::isfinite(r.rho_hat) || !std::isfinite(r.sigma2_hat)) {
        throw numerical_error("observed-data MLE failed to produce finite estimates");
    }
    return r;
}

namespace {

double mlen_se(const Series& s, double sigma2) {
    const auto idx = s.observed_indices();
    const std::size_t n = idx.size();
    if (n < 3) throw precondition_error("need at least three observed values");
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double v = s.y[idx[k]];
        sum += v;
        sumsq += v * v;
    }
    const double nd = static_cast<double>(n);
    const double den = nd * sumsq - sum * sum;
    if (!(den > 0.0)) throw numerical_error("degenerate denominator in MLE statistic");
    return std::sqrt(nd * sigma2 / den);
}

}  // namespace

double mlen_statistic(const Series& s, const MleResult& fit) {
    return (fit.rho_hat - 1.0) / mlen_se(s, fit.sigma2_hat);
}

double mlens_statistic(const Series& s, const MleResult& fit) {
    const double scale = static_cast<double>(s.size()) /
                         static_cast<double>(s.n_observed());
    return scale * mlen_statistic(s, fit);
}

TestResult mlen_test(const Series& s, const TableSet& tables, double alpha) {
    (void)alpha;
    const MleResult fit = fit_observed_mle(s);
    TestResult r;
    r.statistic = mlen_statistic(s, fit);
    r.rho_hat = fit.rho_hat;
    r.sigma2_hat = fit.sigma2_hat;
    r.effective_obs = s.n_observed();
    r.p_value = tables.p_value(r.statistic, s.n_observed(), &r.p_clamped);
    return r;
}

TestResult mlens_test(const Series& s, const TableSet& tables, double alpha) {
    (void)alpha;
    const MleResult fit = fit_observed_mle(s);
    TestResult r;
    r.statistic = mlens_statistic(s, fit);
    r.rho_hat = fit.rho_hat;
    r.sigma2_hat = fit.sigma2_hat;
    r.effective_obs = s.size();
    r.p_value = tables.p_value(r.statistic, s.size(), &r.p_clamped);
    return r;
}

}  // namespace unitroot
