#include "unitroot/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace unitroot {

Mechanism parse_mechanism(const std::string& name) {
    if (name == "mcar") return Mechanism::mcar;
    if (name == "mar") return Mechanism::mar;
    if (name == "mnar-d" || name == "mnard") return Mechanism::mnar_d;
    if (name == "mnar-t" || name == "mnart") return Mechanism::mnar_t;
    if (name == "mnar-p" || name == "mnarp") return Mechanism::mnar_p;
    if (name == "mnar-h" || name == "mnarh") return Mechanism::mnar_h;
    throw input_error("unknown missingness mechanism: " + name);
}

std::string mechanism_name(Mechanism m) {
    switch (m) {
        case Mechanism::mcar: return "mcar";
        case Mechanism::mar: return "mar";
        case Mechanism::mnar_d: return "mnar-d";
        case Mechanism::mnar_t: return "mnar-t";
        case Mechanism::mnar_p: return "mnar-p";
        case Mechanism::mnar_h: return "mnar-h";
    }
    throw input_error("invalid mechanism value");
}

namespace {

void check_rate(double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw input_error("missing rate must lie in [0, 1)");
    }
}

// Value ranks (0 = smallest); ties broken by earlier index first.
std::vector<std::size_t> value_order(const std::vector<double>& y) {
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    return order;
}

}  // namespace

std::vector<bool> gen_mcar(std::size_t T, double rate, Rng& rng) {
    check_rate(rate);
    std::vector<bool> obs(T);
    for (std::size_t t = 0; t < T; ++t) obs[t] = rng.uniform() >= rate;
    return obs;
}

double mar_coefficient(std::size_t T, double rate) {
    check_rate(rate);
    if (rate == 0.0) return 0.0;
    const double Td = static_cast<double>(T);
    auto mean_p = [&](double c) {
        double sum = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            sum += std::min(c * static_cast<double>(t + 1), 1.0);
        }
        return sum / Td;
    };
    // Unclipped closed form; exact whenever c (T) stays below 1.
    double c = 2.0 * rate / (Td + 1.0);
    if (c * Td <= 1.0) return c;
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        c = 0.5 * (lo + hi);
        (mean_p(c) < rate ? lo : hi) = c;
    }
    return 0.5 * (lo + hi);
}

std::vector<bool> gen_mar(std::size_t T, double rate, Rng& rng) {
    const double c = mar_coefficient(T, rate);
    std::vector<bool> obs(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double p = std::min(c * static_cast<double>(t + 1), 1.0);
        obs[t] = rng.uniform() >= p;
    }
    return obs;
}

std::vector<bool> gen_mnar_d(const std::vector<double>& y, double rate) {
    check_rate(rate);
    const std::size_t T = y.size();
    const std::size_t n_missing =
        std::min(T, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(T))));
    // The largest n_missing values go missing; among equal values the earlier
    // index goes missing first.
    std::vector<std::size_t> order(T);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
    std::vector<bool> obs(T, true);
    for (std::size_t i = 0; i < n_missing; ++i) obs[order[i]] = false;
    return obs;
}

std::vector<bool> gen_mnar_t(const std::vector<double>& y, double rate, Rng& rng) {
    check_rate(rate);
    const std::size_t T = y.size();
    auto mean_p = [&](double c) {
        double sum = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double s = std::pow(static_cast<double>(t + 1) / static_cast<double>(T), 2);
            sum += 1.0 / (1.0 + std::exp(-c * s * y[t]));
        }
        return sum / static_cast<double>(T);
    };
    // mean_p is monotone in c when the late values trend positive (typical
    // for the unit-root paths of interest); bisect on a sign-expanded
    // bracket, falling back to the better endpoint if the target rate is
    // unattainable within tolerance.
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 60 && mean_p(lo) > rate; ++i) lo *= 2.0;
    for (int i = 0; i < 60 && mean_p(hi) < rate; ++i) hi *= 2.0;
    double c = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        c = 0.5 * (lo + hi);
        const double m = mean_p(c);
        if (std::abs(m - rate) < 0.005) break;
        (m < rate ? lo : hi) = c;
    }
    std::vector<bool> obs(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double s = std::pow(static_cast<double>(t + 1) / static_cast<double>(T), 2);
        const double p = 1.0 / (1.0 + std::exp(-c * s * y[t]));
        obs[t] = rng.uniform() >= p;
    }
    return obs;
}

std::array<double, 3> mnar_p_probabilities(double rate) {
    check_rate(rate);
    // Base profile (0.4, 0.1, 0) across (top, middle, bottom) value terciles
    // averages 1/6; scale to the target rate, clip at 1, and push clipped
    // excess into the next stratum down.
    std::array<double, 3> p = {0.4, 0.1, 0.0};
    const double scale = rate / (0.5 / 3.0);
    double carry = 0.0;
    for (double& pi : p) {
        pi = pi * scale + carry;
        carry = 0.0;
        if (pi > 1.0) {
            carry = pi - 1.0;
            pi = 1.0;
        }
    }
    return p;
}

namespace {

std::vector<bool> stratified_mask(const std::vector<double>& y, const std::array<double, 3>& probs,
                                  double top_width, Rng& rng) {
    const std::size_t T = y.size();
    const auto order = value_order(y);
    // rank_frac in [0,1): 0 = smallest value.
    std::vector<double> rank_frac(T);
    for (std::size_t i = 0; i < T; ++i) {
        rank_frac[order[i]] = static_cast<double>(i) / static_cast<double>(T);
    }
    std::vector<bool> obs(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double from_top = 1.0 - rank_frac[t];  // (0, 1]; small = near top
        double p;
        if (from_top <= top_width) {
            p = 1.0;
        } else if (from_top <= top_width + (1.0 - top_width) / 3.0) {
            p = probs[0];
        } else if (from_top <= top_width + 2.0 * (1.0 - top_width) / 3.0) {
            p = probs[1];
        } else {
            p = probs[2];
        }
        obs[t] = rng.uniform() >= p;
    }
    return obs;
}

}  // namespace

std::vector<bool> gen_mnar_p(const std::vector<double>& y, double rate, Rng& rng) {
    return stratified_mask(y, mnar_p_probabilities(rate), 0.0, rng);
}

std::vector<bool> gen_mnar_h(const std::vector<double>& y, double rate, Rng& rng) {
    check_rate(rate);
    if (rate < 1.0 / 6.0) {
        throw precondition_error("MNAR-H requires a missing rate of at least 1/6");
    }
    // Fully-missing top stratum of width w0; the remaining strata keep the
    // base profile, whose overall mean then matches the target rate.
    const double w0 = (6.0 * rate - 1.0) / 5.0;
    return stratified_mask(y, {0.4, 0.1, 0.0}, w0, rng);
}

std::vector<bool> generate_mask(Mechanism m, const std::vector<double>& y,
                                double rate, Rng& rng) {
    switch (m) {
        case Mechanism::mcar: return gen_mcar(y.size(), rate, rng);
        case Mechanism::mar: return gen_mar(y.size(), rate, rng);
        case Mechanism::mnar_d: return gen_mnar_d(y, rate);
        case Mechanism::mnar_t: return gen_mnar_t(y, rate, rng);
        case Mechanism::mnar_p: return gen_mnar_p(y, rate, rng);
        case Mechanism::mnar_h: return gen_mnar_h(y, rate, rng);
    }
    throw input_error("invalid mechanism value");
}

}  // namespace unitroot
