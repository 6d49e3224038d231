#include "unitroot/ssmimpute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "unitroot/baselines.hpp"
#include "unitroot/obslik.hpp"
#include "nelder_mead.hpp"

namespace unitroot {

std::vector<double> peak_multipliers(const std::vector<bool>& observed) {
    const std::size_t T = observed.size();
    std::vector<double> mult(T, 0.0);
    std::size_t t = 0;
    while (t < T) {
        if (!observed[t]) {
            const std::size_t u = t;
            while (t + 1 < T && !observed[t + 1]) ++t;
            const std::size_t v = t;
            const std::size_t half = u + (v - u) / 2;
            for (std::size_t p = u; p <= v; ++p) {
                mult[p] = static_cast<double>(p <= half ? p - u + 1 : v - p + 1);
            }
        }
        ++t;
    }
    return mult;
}

namespace {

struct FitStep {
    Eigen::VectorXd coef;   // intercept first, then lags 1..q
    double s2 = 0.0;
    Eigen::MatrixXd xtxi;   // (X'X)^-1
    double loglik = 0.0;
    std::size_t rows = 0;
};

// Least squares of the observed outcomes on [1, c_{t-1}, ..., c_{t-q}].
FitStep fit_regression(const std::vector<double>& y,
                       const std::vector<bool>& observed,
                       const std::vector<double>& container, int q) {
    const std::size_t T = y.size();
    const int k = q + 1;
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd row(k);
    std::size_t rows = 0;
    double yy = 0.0;
    for (std::size_t t = static_cast<std::size_t>(q); t < T; ++t) {
        if (!observed[t]) continue;
        row(0) = 1.0;
        for (int j = 1; j <= q; ++j) row(j) = container[t - static_cast<std::size_t>(j)];
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
        xty += row * y[t];
        yy += y[t] * y[t];
        ++rows;
    }
    if (rows < static_cast<std::size_t>(k) + 1) {
        throw precondition_error("too few observed outcomes for the state-space regression");
    }
    xtx = xtx.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    if (llt.info() != Eigen::Success) {
        throw numerical_error("singular design in the state-space regression");
    }
    FitStep f;
    f.coef = llt.solve(xty);
    f.xtxi = llt.solve(Eigen::MatrixXd::Identity(k, k));
    const double rss = std::max(yy - f.coef.dot(xty), 0.0);
    f.rows = rows;
    f.s2 = rss / static_cast<double>(rows);
    if (!(f.s2 > 0.0)) f.s2 = 1e-12;
    f.loglik = -0.5 * static_cast<double>(rows) *
               (std::log(2.0 * M_PI * f.s2) + 1.0);
    return f;
}

// Forward-filter backward-sampling draw of the missing values under the
// scalar model y_t = a + b y_{t-1} + e_t with exact observations and a
// diffuse start.  Returns the completed series; observed entries untouched.
std::vector<double> ffbs_draw_ar1(const std::vector<double>& y,
                                  const std::vector<bool>& observed, double a,
                                  double b, double s2, Rng& rng) {
    const std::size_t T = y.size();
    std::vector<double> m(T), P(T);
    if (observed[0]) {
        m[0] = y[0];
        P[0] = 0.0;
    } else {
        m[0] = 0.0;
        P[0] = 1e7;
    }
    for (std::size_t t = 1; t < T; ++t) {
        const double pm = a + b * m[t - 1];
        const double pP = b * b * P[t - 1] + s2;
        if (observed[t]) {
            m[t] = y[t];
            P[t] = 0.0;
        } else {
            m[t] = pm;
            P[t] = pP;
        }
    }
    std::vector<double> x(T);
    if (observed[T - 1]) {
        x[T - 1] = y[T - 1];
    } else {
        x[T - 1] = m[T - 1] + std::sqrt(std::max(P[T - 1], 0.0)) * rng.normal();
    }
    for (std::size_t ti = T - 1; ti-- > 0;) {
        if (observed[ti]) {
            x[ti] = y[ti];
            continue;
        }
        const double pP = b * b * P[ti] + s2;
        const double J = pP > 0.0 ? P[ti] * b / pP : 0.0;
        const double cm = m[ti] + J * (x[ti + 1] - (a + b * m[ti]));
        const double cv = P[ti] - J * b * P[ti];
        x[ti] = cm + std::sqrt(std::max(cv, 0.0)) * rng.normal();
    }
    return x;
}

// Joint draw of the missing values for q > 1 from the Gaussian conditional
// implied by the regression rows t = q..T-1.  The residual map is affine,
// e = A y - (a) 1, so y_miss | y_obs is normal with precision
// (A_m' A_m)/s2; a small ridge keeps edge values (entering few rows) proper.
std::vector<double> joint_draw_arq(const std::vector<double>& y,
                                   const std::vector<bool>& observed,
                                   const Eigen::VectorXd& coef, double s2,
                                   int q, const std::vector<double>& container,
                                   Rng& rng) {
    const std::size_t T = y.size();
    std::vector<std::size_t> miss;
    std::vector<int> col(T, -1);
    for (std::size_t t = 0; t < T; ++t) {
        if (!observed[t]) {
            col[t] = static_cast<int>(miss.size());
            miss.push_back(t);
        }
    }
    std::vector<double> x(container);
    for (std::size_t t = 0; t < T; ++t) {
        if (observed[t]) x[t] = y[t];
    }
    if (miss.empty()) return x;

    const std::size_t M = miss.size();
    Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(M, M);
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(M);
    std::vector<int> idx(static_cast<std::size_t>(q) + 1);
    std::vector<double> w(static_cast<std::size_t>(q) + 1);
    for (std::size_t t = static_cast<std::size_t>(q); t < T; ++t) {
        // Row t: y_t - sum_j b_j y_{t-j} = a + e_t.
        double c = coef(0);
        int nm = 0;
        for (int j = 0; j <= q; ++j) {
            const std::size_t pos = t - static_cast<std::size_t>(j);
            const double weight = j == 0 ? 1.0 : -coef(j);
            if (col[pos] >= 0) {
                idx[static_cast<std::size_t>(nm)] = col[pos];
                w[static_cast<std::size_t>(nm)] = weight;
                ++nm;
            } else {
                c -= weight * y[pos];
            }
        }
        for (int i = 0; i < nm; ++i) {
            lin(idx[static_cast<std::size_t>(i)]) += w[static_cast<std::size_t>(i)] * c;
            for (int jj = 0; jj < nm; ++jj) {
                prec(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(jj)]) +=
                    w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(jj)];
            }
        }
    }
    const double ridge = 1e-9 * (prec.trace() / static_cast<double>(M) + 1.0);
    prec.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
        throw numerical_error("degenerate conditional in the state-space draw");
    }
    const Eigen::VectorXd mean = llt.solve(lin);
    Eigen::VectorXd z(M);
    for (std::size_t i = 0; i < M; ++i) z(static_cast<Eigen::Index>(i)) = rng.normal();
    // Solve L' w = z so that w ~ N(0, prec^-1); scale by sigma.
    const Eigen::VectorXd noise =
        llt.matrixU().solve(z) * std::sqrt(s2);
    for (std::size_t i = 0; i < M; ++i) {
        x[miss[i]] = mean(static_cast<Eigen::Index>(i)) + noise(static_cast<Eigen::Index>(i));
    }
    return x;
}

// Log-likelihood of an AR(q) state space (companion form, exact
// observations, diffuse start) evaluated on the observed values only.
double arq_filter_loglik(const std::vector<double>& y,
                         const std::vector<bool>& observed,
                         const Eigen::VectorXd& b, double s2,
                         std::vector<double>* filtered = nullptr) {
    const int q = static_cast<int>(b.size());
    const std::size_t T = y.size();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(q);
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(q, q) * 1e7;
    double ll = 0.0;
    if (filtered) filtered->assign(T, 0.0);
    auto update = [&](double value) {
        const double F = P(0, 0);
        const double v = value - m(0);
        if (F > 1e-12) {
            if (F < 1e6) ll += -0.5 * (std::log(2.0 * M_PI * F) + v * v / F);
            const Eigen::VectorXd K = P.col(0) / F;
            m += K * v;
            P -= K * P.row(0);
        }
    };
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            // Predict: first component gets b'm, others shift down.
            Eigen::VectorXd m2(q);
            m2(0) = b.dot(m);
            for (int i = 1; i < q; ++i) m2(i) = m(i - 1);
            Eigen::MatrixXd Tb = Eigen::MatrixXd::Zero(q, q);
            Tb.row(0) = b.transpose();
            for (int i = 1; i < q; ++i) Tb(i, i - 1) = 1.0;
            P = Tb * P * Tb.transpose();
            P(0, 0) += s2;
            m = m2;
        }
        if (filtered) (*filtered)[t] = m(0);
        if (observed[t]) {
            update(y[t]);
            if (filtered) (*filtered)[t] = y[t];
        }
    }
    return ll;
}

// Kalman-filter initial fill: AR(q) maximum likelihood on the observed
// values, then filtered means at the missing positions.
std::vector<double> kalman_initial_impute(const Series& s, int q,
                                          bool* fallback) {
    *fallback = false;
    try {
        const std::size_t T = s.size();
        std::vector<double> fill(T);
        if (q == 1) {
            const MleResult mle = fit_observed_mle(s);
            double prev = 0.0;
            bool seen = false;
            for (std::size_t t = 0; t < T; ++t) {
                if (s.observed[t]) {
                    fill[t] = s.y[t];
                    prev = s.y[t];
                    seen = true;
                } else {
                    fill[t] = seen ? mle.rho_hat * prev : 0.0;
                    prev = fill[t];
                }
            }
            return fill;
        }
        // q > 1: Nelder-Mead over (b_1..b_q, log s2) on the companion filter.
        const InitialEstimates init = initial_estimates(s);
        std::vector<double> x0(static_cast<std::size_t>(q) + 1, 0.0);
        x0[0] = init.rho0;
        x0[static_cast<std::size_t>(q)] = std::log(init.sigma20);
        auto neg = [&](const std::vector<double>& p) {
            Eigen::VectorXd b(q);
            for (int j = 0; j < q; ++j) {
                if (!std::isfinite(p[static_cast<std::size_t>(j)]) ||
                    std::abs(p[static_cast<std::size_t>(j)]) > 5.0) {
                    return 1e100;
                }
                b(j) = p[static_cast<std::size_t>(j)];
            }
            const double s2 = std::exp(p[static_cast<std::size_t>(q)]);
            if (!(s2 > 0.0) || !std::isfinite(s2)) return 1e100;
            const double ll = arq_filter_loglik(s.y, s.observed, b, s2);
            return std::isfinite(ll) ? -ll : 1e100;
        };
        const auto nm = detail::nelder_mead(neg, x0, 0.1, 1e-8, 2000);
        Eigen::VectorXd b(q);
        for (int j = 0; j < q; ++j) b(j) = nm.x[static_cast<std::size_t>(j)];
        std::vector<double> filtered;
        arq_filter_loglik(s.y, s.observed, b,
                          std::exp(nm.x[static_cast<std::size_t>(q)]), &filtered);
        for (std::size_t t = 0; t < T; ++t) {
            fill[t] = s.observed[t] ? s.y[t] : filtered[t];
        }
        return fill;
    } catch (const std::exception&) {
        *fallback = true;
        return impute_linear(s);
    }
}

}  // namespace

SsmResult ssm_fit(const Series& s, Rng& rng, const SsmOptions& opts,
                  const RegressionSpec& spec) {
    const std::size_t T = s.size();
    const int q = opts.lag_order;
    if (q < 1) throw input_error("lag order must be at least 1");
    if (opts.imputations < 1) throw input_error("need at least one imputation");
    if (opts.delta.kind == DeltaKind::truncation) {
        throw input_error("truncation delta is not supported by the state-space method");
    }
    if (s.n_observed() < static_cast<std::size_t>(q) + 2) {
        throw precondition_error("need at least q+2 observed values");
    }
    const double delta =
        opts.delta.kind == DeltaKind::constant ? opts.delta.delta : 0.0;
    if (delta > 0.0 && opts.delta.shape == DeltaShape::stagnant &&
        !opts.stagnant_multipliers) {
        throw input_error("stagnant multipliers are disabled; enable them explicitly");
    }

    std::vector<double> mult;
    if (delta > 0.0) {
        if (opts.delta.shape == DeltaShape::stagnant) {
            mult.assign(T, 0.0);
            for (std::size_t t = 0; t < T; ++t) {
                if (!s.observed[t]) mult[t] = 1.0;
            }
        } else {
            mult = peak_multipliers(s.observed);
        }
    }

    SsmResult res;
    std::vector<double> container = kalman_initial_impute(s, q, &res.init_fallback);

    FitStep fit;
    Eigen::VectorXd prev;
    double prev_ll = 0.0;
    for (int k = 0; k < opts.max_iterations; ++k) {
        fit = fit_regression(s.y, s.observed, container, q);
        res.loglik_trace.push_back(fit.loglik);
        res.iterations = static_cast<std::size_t>(k) + 1;
        if (fit.coef.cwiseAbs().maxCoeff() > 10.0) {
            throw numerical_error(
                "state-space iteration diverged (|coefficient| > 10 at iteration " +
                std::to_string(k + 1) + ")");
        }
        if (k > 0) {
            const double dc = (fit.coef - prev).cwiseAbs().maxCoeff();
            const double dll = std::abs(fit.loglik - prev_ll);
            if (dc < opts.tol_coef &&
                dll <= opts.tol_loglik * std::max(1.0, std::abs(prev_ll))) {
                res.converged = true;
                break;
            }
        }
        prev = fit.coef;
        prev_ll = fit.loglik;
        if (k + 1 == opts.max_iterations) break;

        std::vector<double> draw =
            q == 1 ? ffbs_draw_ar1(s.y, s.observed, fit.coef(0), fit.coef(1),
                                   fit.s2, rng)
                   : joint_draw_arq(s.y, s.observed, fit.coef, fit.s2, q,
                                    container, rng);
        for (std::size_t t = 0; t < T; ++t) {
            container[t] = s.observed[t] ? s.y[t] : draw[t];
            if (delta > 0.0 && !s.observed[t]) container[t] += mult[t] * delta;
        }
    }

    // Flag a log-likelihood drop of more than 1% of the trace range.
    if (res.loglik_trace.size() > 1) {
        const auto [mn, mx] = std::minmax_element(res.loglik_trace.begin(),
                                                  res.loglik_trace.end());
        const double range = *mx - *mn;
        for (std::size_t i = 1; i < res.loglik_trace.size(); ++i) {
            if (res.loglik_trace[i] < res.loglik_trace[i - 1] - 0.01 * range) {
                res.loglik_drop = true;
                break;
            }
        }
    }

    const int kdim = q + 1;
    Eigen::MatrixXd cov = fit.s2 * fit.xtxi;
    Eigen::MatrixXd L;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        L = llt.matrixL();
    } else {
        // Clip negative eigenvalues to zero and use the symmetric square root.
        res.posterior_clipped = true;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        L = es.eigenvectors() * ev.asDiagonal();
    }

    const int M = opts.imputations;
    std::vector<std::vector<double>> completed(static_cast<std::size_t>(M));
    std::vector<double> stats(static_cast<std::size_t>(M));
    for (int im = 0; im < M; ++im) {
        Eigen::VectorXd z(kdim);
        for (int j = 0; j < kdim; ++j) z(j) = rng.normal();
        const Eigen::VectorXd cdraw = fit.coef + L * z;
        std::vector<double> zser(T);
        for (std::size_t t = 0; t < T; ++t) {
            if (s.observed[t]) {
                zser[t] = s.y[t];
                continue;
            }
            if (t < static_cast<std::size_t>(q)) {
                // Pre-sample edge: no complete lag window exists.  For q=1 and
                // t=0 use the diffuse conditional given the next container
                // value; otherwise stay at the container mean with the model
                // noise so every missing index receives a proper draw.
                if (q == 1 && t == 0 && std::abs(cdraw(1)) >= 0.1 && T > 1) {
                    const double cm = (container[1] - cdraw(0)) / cdraw(1);
                    const double cv = fit.s2 / (cdraw(1) * cdraw(1));
                    zser[t] = cm + std::sqrt(cv) * rng.normal();
                } else {
                    zser[t] = container[t] + std::sqrt(fit.s2) * rng.normal();
                }
                continue;
            }
            double v = cdraw(0);
            for (int j = 1; j <= q; ++j) {
                v += cdraw(j) * container[t - static_cast<std::size_t>(j)];
            }
            zser[t] = v;
        }
        stats[static_cast<std::size_t>(im)] = df_fit(zser, spec).statistic;
        completed[static_cast<std::size_t>(im)] = std::move(zser);
    }

    std::vector<std::size_t> order(stats.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return stats[a] < stats[b]; });
    const std::size_t med = order[(stats.size() - 1) / 2];
    res.pooled_imputation = std::move(completed[med]);
    res.statistics = stats;
    std::sort(res.statistics.begin(), res.statistics.end());

    res.coefficients.assign(fit.coef.data(), fit.coef.data() + kdim);
    res.sigma2_hat = fit.s2;
    res.rho_hat = 0.0;
    for (int j = 1; j <= q; ++j) res.rho_hat += fit.coef(j);
    return res;
}

TestResult ssm_test(const Series& s, const TableSet& tables, Rng& rng,
                    const SsmOptions& opts, double alpha,
                    const RegressionSpec& spec) {
    (void)alpha;
    const SsmResult fit = ssm_fit(s, rng, opts, spec);
    const std::size_t M = fit.statistics.size();
    TestResult r;
    r.statistic = fit.statistics[(M - 1) / 2];
    r.rho_hat = fit.rho_hat;
    r.sigma2_hat = fit.sigma2_hat;
    r.effective_obs = s.size();
    r.p_value = tables.p_value(r.statistic, s.size(), &r.p_clamped);
    return r;
}

}  // namespace unitroot
