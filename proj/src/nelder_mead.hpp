#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace unitroot::detail {

struct NmResult {
    std::vector<double> x;
    double fmin = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Nelder-Mead simplex minimization (reflection 1, expansion 2, contraction
// 0.5, shrink 0.5).  The initial simplex offsets each coordinate of `x0` by
// `scale`; convergence is relative spread of the simplex function values
// below `ftol`.
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            std::vector<double> x0, double scale, double ftol,
                            std::size_t max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    std::vector<std::size_t> ord(n + 1);
    NmResult result;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = ord.front(), worst = ord.back();
        const std::size_t second_worst = ord[n - 1];
        if (std::abs(fv[worst] - fv[best]) <=
            ftol * (std::abs(fv[worst]) + std::abs(fv[best]) + 1e-300)) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d) {
                p[d] = centroid[d] + coef * (centroid[d] - simplex[worst][d]);
            }
            return p;
        };

        const auto refl = blend(1.0);
        const double f_refl = f(refl);
        if (f_refl < fv[best]) {
            const auto expd = blend(2.0);
            const double f_exp = f(expd);
            if (f_exp < f_refl) {
                simplex[worst] = expd;
                fv[worst] = f_exp;
            } else {
                simplex[worst] = refl;
                fv[worst] = f_refl;
            }
        } else if (f_refl < fv[second_worst]) {
            simplex[worst] = refl;
            fv[worst] = f_refl;
        } else {
            const auto contr = blend(f_refl < fv[worst] ? 0.5 : -0.5);
            const double f_contr = f(contr);
            if (f_contr < std::min(f_refl, fv[worst])) {
                simplex[worst] = contr;
                fv[worst] = f_contr;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d) {
                        simplex[i][d] =
                            simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
                    }
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }

    const std::size_t argmin = static_cast<std::size_t>(
        std::min_element(fv.begin(), fv.end()) - fv.begin());
    result.x = simplex[argmin];
    result.fmin = fv[argmin];
    result.iterations = iter;
    return result;
}

}  // namespace unitroot::detail
