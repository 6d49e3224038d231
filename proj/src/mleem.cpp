#include "unitroot/mleem.hpp"

#include <cmath>

namespace unitroot {

namespace {

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double delta_value(const DeltaSpec& spec, double rho, double sigma2, double prev) {
    switch (spec.kind) {
        case DeltaKind::none:
            return 0.0;
        case DeltaKind::constant:
            return spec.delta;
        case DeltaKind::truncation:
            return truncation_delta(spec.lambda, rho, std::sqrt(sigma2), prev);
    }
    return 0.0;
}

}  // namespace

double truncation_delta(double lambda, double rho, double sigma, double y_prev) {
    if (!(sigma > 0.0)) throw precondition_error("truncation delta needs sigma > 0");
    const double z = (lambda - rho * y_prev) / sigma;
    const double tail = 1.0 - Phi(z);
    if (tail < 1e-12) {
        // Mills ratio ~ z for large z, so the adjustment approaches the
        // distance from the prediction to the threshold.
        return lambda - rho * y_prev;
    }
    return sigma * phi(z) / tail;
}

MleemResult mleem_fit(const Series& s, const DeltaSpec& delta, double tol,
                      std::size_t max_iter) {
    const std::size_t T = s.size();
    if (s.n_observed() < 3) {
        throw precondition_error("MLEEM needs at least three observed values");
    }
    const auto idx = s.observed_indices();

    // Adjacent-pair starting values (Eq-5 style); unit root plus gap-scaled
    // difference variance on masks with no adjacent pair.
    double rho = 1.0, sigma2 = 1.0;
    {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 1; k < idx.size(); ++k) {
            if (idx[k] - idx[k - 1] == 1) {
                num += s.y[idx[k]] * s.y[idx[k - 1]];
                den += s.y[idx[k - 1]] * s.y[idx[k - 1]];
            }
        }
        if (den > 0.0) {
            rho = num / den;
            double ss = 0.0;
            std::size_t cnt = 0;
            for (std::size_t k = 1; k < idx.size(); ++k) {
                if (idx[k] - idx[k - 1] == 1) {
                    const double r = s.y[idx[k]] - rho * s.y[idx[k - 1]];
                    ss += r * r;
                    ++cnt;
                }
            }
            if (cnt > 0 && ss > 0.0) sigma2 = ss / static_cast<double>(cnt);
        } else {
            double ss = 0.0;
            for (std::size_t k = 1; k < idx.size(); ++k) {
                const double d = s.y[idx[k]] - s.y[idx[k - 1]];
                ss += d * d / static_cast<double>(idx[k] - idx[k - 1]);
            }
            sigma2 = ss / static_cast<double>(idx.size() - 1);
        }
        if (!(sigma2 > 0.0)) sigma2 = 1e-8;
    }

    // Sign of the delta adjustment per index: +1 first half of each gap,
    // -1 second half (peak), or +1 everywhere (stagnant); 0 at observed.
    std::vector<double> sign(T, 0.0);
    for (std::size_t t = 0; t < T;) {
        if (s.observed[t]) {
            ++t;
            continue;
        }
        std::size_t u = t, v = t;
        while (v + 1 < T && !s.observed[v + 1]) ++v;
        const std::size_t half = u + (v - u) / 2;
        for (std::size_t g = u; g <= v; ++g) {
            sign[g] = (delta.shape == DeltaShape::stagnant || g <= half) ? 1.0 : -1.0;
        }
        t = v + 1;
    }

    std::vector<double> z(T);
    MleemResult result;
    result.converged = false;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        // E-step: chronological imputation.
        for (std::size_t t = 0; t < T; ++t) {
            z[t] = s.observed[t] ? s.y[t] : kNaN;
        }
        if (!s.observed[0]) {
            const std::size_t first = idx.front();
            for (std::size_t t = first; t-- > 0;) {
                const double d = delta_value(delta, rho, sigma2, z[t + 1]);
                z[t] = (std::abs(rho) > 0.1) ? z[t + 1] / rho + sign[t] * d
                                             : s.y[first];
            }
        }
        for (std::size_t t = idx.front() + 1; t < T; ++t) {
            if (s.observed[t]) continue;
            const double d = delta_value(delta, rho, sigma2, z[t - 1]);
            z[t] = rho * z[t - 1] + sign[t] * d;
        }

        // M-step: through-origin OLS over the completed series.
        double num = 0.0, den = 0.0;
        for (std::size_t k = 1; k < T; ++k) {
            num += z[k] * z[k - 1];
            den += z[k - 1] * z[k - 1];
        }
        if (!(den > 0.0)) throw numerical_error("degenerate M-step in MLEEM");
        const double rho_new = num / den;
        double rss = 0.0;
        for (std::size_t k = 1; k < T; ++k) {
            const double r = z[k] - rho_new * z[k - 1];
            rss += r * r;
        }
        const double sigma2_new = rss / static_cast<double>(T - 1);
        result.loglik_trace.push_back(
            -0.5 * static_cast<double>(T - 1) *
            (std::log(2.0 * M_PI * sigma2_new) + 1.0));

        const bool done = std::abs(rho_new - rho) < tol &&
                          std::abs(sigma2_new - sigma2) < tol * std::abs(sigma2);
        rho = rho_new;
        sigma2 = sigma2_new;
        if (done) {
            result.converged = true;
            ++iter;
            break;
        }
    }

    if (!std::isfinite(rho) || !std::isfinite(sigma2)) {
        throw numerical_error("MLEEM estimates diverged");
    }
    result.rho_hat = rho;
    result.sigma2_hat = sigma2;
    result.imputed = z;
    result.iterations = iter;
    return result;
}

TestResult mleem_test(const Series& s, const TableSet& tables, double alpha,
                      const DeltaSpec& delta, const RegressionSpec& spec) {
    (void)alpha;
    const MleemResult fit = mleem_fit(s, delta);
    const DfFit df = df_fit(fit.imputed, spec);
    TestResult r;
    r.statistic = df.statistic;
    r.rho_hat = fit.rho_hat;
    r.sigma2_hat = fit.sigma2_hat;
    r.effective_obs = s.size();
    r.p_value = tables.p_value(df.statistic, s.size(), &r.p_clamped);
    return r;
}

}  // namespace unitroot
