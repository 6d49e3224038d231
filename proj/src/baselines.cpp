#include "unitroot/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "nelder_mead.hpp"
#include "unitroot/obslik.hpp"

namespace unitroot {

namespace {

void require_observed(const Series& s, std::size_t min_count, const char* what) {
    if (s.n_observed() < min_count) {
        throw precondition_error(std::string(what) + " needs at least " +
                                 std::to_string(min_count) + " observed values");
    }
}

}  // namespace

std::vector<double> impute_mean(const Series& s) {
    require_observed(s, 1, "mean imputation");
    const double m = mean(s.observed_values());
    std::vector<double> z(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) z[t] = s.observed[t] ? s.y[t] : m;
    return z;
}

std::vector<double> impute_locf(const Series& s) {
    require_observed(s, 1, "LOCF");
    const auto idx = s.observed_indices();
    std::vector<double> z(s.size());
    double last = s.y[idx.front()];  // leading gap back-filled
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (s.observed[t]) last = s.y[t];
        z[t] = last;
    }
    return z;
}

std::vector<double> impute_linear(const Series& s) {
    require_observed(s, 2, "linear interpolation");
    const auto idx = s.observed_indices();
    std::vector<double> z(s.size());
    std::size_t k = 0;  // next observed index >= t's bracket start
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (s.observed[t]) {
            z[t] = s.y[t];
            continue;
        }
        if (t < idx.front()) {
            z[t] = s.y[idx.front()];
        } else if (t > idx.back()) {
            z[t] = s.y[idx.back()];
        } else {
            while (idx[k + 1] < t) ++k;
            const std::size_t a = idx[k], b = idx[k + 1];
            const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
            z[t] = s.y[a] + w * (s.y[b] - s.y[a]);
        }
    }
    return z;
}

std::vector<double> impute_spline(const Series& s) {
    if (s.n_observed() < 4) return impute_linear(s);
    const auto idx = s.observed_indices();
    const std::size_t n = idx.size();

    // Natural cubic spline through (idx[i], y[idx[i]]): solve the standard
    // tridiagonal system for second derivatives.
    std::vector<double> h(n - 1), alpha(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = static_cast<double>(idx[i + 1] - idx[i]);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        alpha[i] = 3.0 * (s.y[idx[i + 1]] - s.y[idx[i]]) / h[i] -
                   3.0 * (s.y[idx[i]] - s.y[idx[i - 1]]) / h[i - 1];
    }
    std::vector<double> l(n, 1.0), mu(n, 0.0), zz(n, 0.0), c(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        l[i] = 2.0 * static_cast<double>(idx[i + 1] - idx[i - 1]) - h[i - 1] * mu[i - 1];
        mu[i] = h[i] / l[i];
        zz[i] = (alpha[i] - h[i - 1] * zz[i - 1]) / l[i];
    }
    std::vector<double> b(n - 1), d(n - 1);
    for (std::size_t i = n - 1; i-- > 0;) {
        c[i] = zz[i] - mu[i] * c[i + 1];
        b[i] = (s.y[idx[i + 1]] - s.y[idx[i]]) / h[i] - h[i] * (c[i + 1] + 2.0 * c[i]) / 3.0;
        d[i] = (c[i + 1] - c[i]) / (3.0 * h[i]);
    }

    std::vector<double> z(s.size());
    std::size_t k = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (s.observed[t]) {
            z[t] = s.y[t];
        } else if (t < idx.front()) {
            z[t] = s.y[idx.front()];
        } else if (t > idx.back()) {
            z[t] = s.y[idx.back()];
        } else {
            while (idx[k + 1] < t) ++k;
            const double dx = static_cast<double>(t - idx[k]);
            z[t] = s.y[idx[k]] + dx * (b[k] + dx * (c[k] + dx * d[k]));
        }
    }
    return z;
}

namespace {

// Kalman filter log-likelihood for y_t = x_t + e (var r), x_t = phi x_{t-1}
// + w (var q), diffuse start.
double structural_loglik(const Series& s, double phi, double q, double r) {
    double a = 0.0, P = 1e7, ll = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (t > 0) {
            a = phi * a;
            P = phi * phi * P + q;
        }
        if (s.observed[t]) {
            const double F = P + r;
            const double v = s.y[t] - a;
            ll += -0.5 * (std::log(2.0 * M_PI * F) + v * v / F);
            const double K = P / F;
            a += K * v;
            P *= (1.0 - K);
        }
    }
    return ll;
}

}  // namespace

std::vector<double> impute_kalman(const Series& s) {
    require_observed(s, 3, "Kalman smoothing imputation");
    const InitialEstimates init = initial_estimates(s);
    const double s0 = std::max(init.sigma20, 1e-3);
    auto nll = [&](const std::vector<double>& p) {
        const double phi = p[0];
        const double q = std::exp(p[1]);
        const double r = std::exp(p[2]);
        if (!std::isfinite(phi) || std::abs(phi) > 1.3 || !std::isfinite(q) ||
            !std::isfinite(r)) {
            return 1e100;
        }
        const double ll = structural_loglik(s, phi, q, r);
        return std::isfinite(ll) ? -ll : 1e100;
    };
    const auto nm = detail::nelder_mead(
        nll, {std::clamp(init.rho0, -1.2, 1.2), std::log(s0), std::log(s0) - 2.0},
        0.1, 1e-8, 1500);
    const double phi = nm.x[0];
    const double q = std::exp(nm.x[1]);
    const double r = std::exp(nm.x[2]);

    // Filter pass storing predicted/filtered moments, then RTS smoothing.
    const std::size_t T = s.size();
    std::vector<double> af(T), Pf(T), ap(T), Pp(T);
    double a = 0.0, P = 1e7;
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            a = phi * af[t - 1];
            P = phi * phi * Pf[t - 1] + q;
        }
        ap[t] = a;
        Pp[t] = P;
        if (s.observed[t]) {
            const double F = P + r;
            const double K = P / F;
            af[t] = a + K * (s.y[t] - a);
            Pf[t] = P * (1.0 - K);
        } else {
            af[t] = a;
            Pf[t] = P;
        }
    }
    std::vector<double> xs(T);
    xs[T - 1] = af[T - 1];
    for (std::size_t t = T - 1; t-- > 0;) {
        const double J = Pp[t + 1] > 0.0 ? Pf[t] * phi / Pp[t + 1] : 0.0;
        xs[t] = af[t] + J * (xs[t + 1] - ap[t + 1]);
    }

    std::vector<double> z(T);
    for (std::size_t t = 0; t < T; ++t) z[t] = s.observed[t] ? s.y[t] : xs[t];
    return z;
}

std::vector<double> complete_case(const Series& s) {
    require_observed(s, 3, "complete-case analysis");
    return s.observed_values();
}

std::vector<std::vector<double>> impute_mice(const Series& s, Rng& rng,
                                             const MiceOptions& opts) {
    require_observed(s, 10, "MICE");
    if (opts.m < 1) throw input_error("MICE needs m >= 1");
    const std::size_t T = s.size();
    const double Td = static_cast<double>(T);

    std::vector<std::vector<double>> out;
    out.reserve(opts.m);
    const std::vector<double> start = impute_linear(s);
    std::vector<std::size_t> missing;
    for (std::size_t t = 1; t < T; ++t) {
        if (!s.observed[t]) missing.push_back(t);
    }

    for (int im = 0; im < opts.m; ++im) {
        std::vector<double> z = start;
        for (int cycle = 0; cycle < opts.burnin; ++cycle) {
            // Regression rows: observed outcome y_t on (1, z_{t-1}, t/T).
            std::size_t rows = 0;
            for (std::size_t t = 1; t < T; ++t) rows += s.observed[t] ? 1 : 0;
            Eigen::MatrixXd X(rows, 3);
            Eigen::VectorXd yv(rows);
            std::size_t i = 0;
            for (std::size_t t = 1; t < T; ++t) {
                if (!s.observed[t]) continue;
                X(i, 0) = 1.0;
                X(i, 1) = z[t - 1];
                X(i, 2) = static_cast<double>(t) / Td;
                yv(i) = s.y[t];
                ++i;
            }
            const Eigen::MatrixXd xtx = X.transpose() * X;
            Eigen::LLT<Eigen::MatrixXd> llt(xtx);
            if (llt.info() != Eigen::Success) {
                throw numerical_error("singular design in chained-equations step");
            }
            const Eigen::VectorXd beta = llt.solve(X.transpose() * yv);
            const Eigen::VectorXd resid = yv - X * beta;
            const double dof = std::max<double>(static_cast<double>(rows) - 3.0, 1.0);
            const double s2 = resid.squaredNorm() / dof;
            // Posterior draws: sigma^2 from scaled inverse chi-square, then
            // coefficients from N(beta, sigma^2 (X'X)^-1).
            const double s2_draw =
                s2 * dof / std::max(rng.chi_square(dof), 1e-12);
            Eigen::LLT<Eigen::MatrixXd> cov_llt(
                (s2_draw * llt.solve(Eigen::MatrixXd::Identity(3, 3))).eval());
            Eigen::VectorXd eps(3);
            for (int j = 0; j < 3; ++j) eps(j) = rng.normal();
            const Eigen::VectorXd bd = beta + cov_llt.matrixL() * eps;
            const double sd = std::sqrt(s2_draw);
            for (std::size_t t : missing) {
                z[t] = bd(0) + bd(1) * z[t - 1] +
                       bd(2) * static_cast<double>(t) / Td + sd * rng.normal();
            }
        }
        out.push_back(std::move(z));
    }
    return out;
}

namespace {

TestResult imputed_test(const std::vector<double>& z, std::size_t nominal_T,
                        const Series& s, const TableSet& tables,
                        const RegressionSpec& spec) {
    const DfFit fit = df_fit(z, spec);
    TestResult r;
    r.statistic = fit.statistic;
    r.rho_hat = fit.rho_hat;
    r.sigma2_hat = fit.sigma2_hat;
    r.effective_obs = nominal_T;
    r.p_value = tables.p_value(fit.statistic, nominal_T, &r.p_clamped);
    return r;
}

}  // namespace

TestResult mean_test(const Series& s, const TableSet& t, double, const RegressionSpec& spec) {
    return imputed_test(impute_mean(s), s.size(), s, t, spec);
}
TestResult locf_test(const Series& s, const TableSet& t, double, const RegressionSpec& spec) {
    return imputed_test(impute_locf(s), s.size(), s, t, spec);
}
TestResult linear_test(const Series& s, const TableSet& t, double, const RegressionSpec& spec) {
    return imputed_test(impute_linear(s), s.size(), s, t, spec);
}
TestResult spline_test(const Series& s, const TableSet& t, double, const RegressionSpec& spec) {
    return imputed_test(impute_spline(s), s.size(), s, t, spec);
}
TestResult kalman_test(const Series& s, const TableSet& t, double, const RegressionSpec& spec) {
    return imputed_test(impute_kalman(s), s.size(), s, t, spec);
}

TestResult complete_case_test(const Series& s, const TableSet& t, double,
                              const RegressionSpec& spec) {
    // The reduced series has length n; its statistic refers to the table
    // interpolated at n.
    const std::vector<double> z = complete_case(s);
    return imputed_test(z, z.size(), s, t, spec);
}

TestResult mice_test(const Series& s, const TableSet& t, Rng& rng, double alpha,
                     const MiceOptions& opts, const RegressionSpec& spec) {
    (void)alpha;
    const auto sets = impute_mice(s, rng, opts);
    std::vector<double> stats;
    std::vector<double> rhos;
    stats.reserve(sets.size());
    for (const auto& z : sets) {
        const DfFit fit = df_fit(z, spec);
        stats.push_back(fit.statistic);
        rhos.push_back(fit.rho_hat);
    }
    std::sort(stats.begin(), stats.end());
    const double median = stats[(stats.size() - 1) / 2];  // lower median
    TestResult r;
    r.statistic = median;
    r.rho_hat = mean(rhos);
    r.effective_obs = s.size();
    r.p_value = t.p_value(median, s.size(), &r.p_clamped);
    return r;
}

}  // namespace unitroot
