#include "unitroot/core.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace unitroot {

Series::Series(std::vector<double> values)
    : y(std::move(values)), observed(y.size(), true) {
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (std::isnan(y[t])) observed[t] = false;
    }
}

Series::Series(std::vector<double> values, std::vector<bool> mask)
    : y(std::move(values)), observed(std::move(mask)) {
    if (y.size() != observed.size()) {
        throw input_error("series values and mask differ in length");
    }
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (!observed[t]) y[t] = kNaN;
    }
}

std::size_t Series::n_observed() const {
    return static_cast<std::size_t>(
        std::count(observed.begin(), observed.end(), true));
}

std::vector<std::size_t> Series::observed_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(size());
    for (std::size_t t = 0; t < size(); ++t) {
        if (observed[t]) idx.push_back(t);
    }
    return idx;
}

std::vector<double> Series::observed_values() const {
    std::vector<double> v;
    v.reserve(size());
    for (std::size_t t = 0; t < size(); ++t) {
        if (observed[t]) v.push_back(y[t]);
    }
    return v;
}

std::string RegressionSpec::key() const {
    std::string base = constant ? (trend ? "ct" : "c") : "nc";
    return base + std::to_string(lags);
}

RegressionSpec RegressionSpec::parse(const std::string& key) {
    RegressionSpec spec;
    std::size_t pos = 0;
    if (key.rfind("nc", 0) == 0) {
        pos = 2;
    } else if (key.rfind("ct", 0) == 0) {
        spec.constant = spec.trend = true;
        pos = 2;
    } else if (key.rfind("c", 0) == 0) {
        spec.constant = true;
        pos = 1;
    } else {
        throw input_error("unknown regression spec key: " + key);
    }
    if (pos >= key.size()) {
        throw input_error("regression spec key missing lag count: " + key);
    }
    spec.lags = std::stoi(key.substr(pos));
    if (spec.lags < 0) throw input_error("negative lag count in spec key");
    return spec;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw precondition_error("mean of empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v, int ddof) {
    if (v.size() <= static_cast<std::size_t>(ddof)) {
        throw precondition_error("variance needs more than ddof observations");
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - ddof);
}

double skewness(const std::vector<double>& v) {
    const double m = mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(const std::vector<double>& v) {
    const double m = mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m4 /= n;
    return m4 / (m2 * m2) - 3.0;
}

}  // namespace unitroot
