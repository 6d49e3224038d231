#include "unitroot/adf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "unitroot/rng.hpp"

namespace unitroot {

DfFit df_fit(const std::vector<double>& y, const RegressionSpec& spec) {
    const std::size_t T = y.size();
    const int p = spec.lags;
    const std::size_t start = static_cast<std::size_t>(p) + 1;
    if (T < start + 3) {
        throw precondition_error("series too short for the requested regression");
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw numerical_error("non-finite value in series for DF regression");
        }
    }

    const std::size_t n = T - start;  // rows: t = start .. T-1 on dy_t
    const std::size_t k = 1 + static_cast<std::size_t>(p) + (spec.constant ? 1 : 0) +
                          (spec.trend ? 1 : 0);
    if (n <= k + 1) {
        throw precondition_error("not enough observations for the DF regression");
    }

    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd dy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = start + i;
        dy(i) = y[t] - y[t - 1];
        std::size_t col = 0;
        X(i, col++) = y[t - 1];
        for (int j = 1; j <= p; ++j) {
            X(i, col++) = y[t - j] - y[t - j - 1];
        }
        if (spec.constant) X(i, col++) = 1.0;
        if (spec.trend) X(i, col++) = static_cast<double>(t + 1);
    }

    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    if (llt.info() != Eigen::Success) {
        throw numerical_error("singular design matrix in DF regression");
    }
    const Eigen::VectorXd beta = llt.solve(X.transpose() * dy);
    const Eigen::VectorXd resid = dy - X * beta;
    const double rss = resid.squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - k);
    const Eigen::MatrixXd xtx_inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    const double se = std::sqrt(sigma2 * xtx_inv(0, 0));
    if (!(se > 0.0) || !std::isfinite(se)) {
        throw numerical_error("degenerate standard error in DF regression");
    }

    DfFit fit;
    fit.statistic = beta(0) / se;
    fit.rho_hat = 1.0 + beta(0);
    fit.sigma2_hat = sigma2;
    fit.effective_obs = n;
    fit.residuals.assign(resid.data(), resid.data() + resid.size());
    return fit;
}

double df_statistic(const std::vector<double>& y, const RegressionSpec& spec) {
    return df_fit(y, spec).statistic;
}

double QuantileTable::quantile(double level) const {
    if (quantiles.empty()) throw precondition_error("empty quantile table");
    if (level <= quantiles.front().first) return quantiles.front().second;
    if (level >= quantiles.back().first) return quantiles.back().second;
    for (std::size_t i = 1; i < quantiles.size(); ++i) {
        if (level <= quantiles[i].first) {
            const auto& [l0, q0] = quantiles[i - 1];
            const auto& [l1, q1] = quantiles[i];
            const double w = (level - l0) / (l1 - l0);
            return q0 + w * (q1 - q0);
        }
    }
    return quantiles.back().second;
}

std::string QuantileTable::to_json() const {
    nlohmann::ordered_json j;
    j["spec"] = spec.key();
    j["sample_size"] = sample_size;
    j["replications"] = replications;
    j["seed"] = seed;
    nlohmann::ordered_json q;
    for (const auto& [level, value] : quantiles) {
        std::ostringstream key;
        key << level;
        q[key.str()] = value;
    }
    j["quantiles"] = q;
    return j.dump(2);
}

QuantileTable QuantileTable::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed quantile table JSON: ") + e.what());
    }
    QuantileTable t;
    try {
        t.spec = RegressionSpec::parse(j.at("spec").get<std::string>());
        t.sample_size = j.at("sample_size").get<std::size_t>();
        t.replications = j.at("replications").get<std::size_t>();
        t.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& [key, value] : j.at("quantiles").items()) {
            t.quantiles.emplace_back(std::stod(key), value.get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("quantile table missing field: ") + e.what());
    }
    std::sort(t.quantiles.begin(), t.quantiles.end());
    return t;
}

void TableSet::add(QuantileTable table) {
    if (!tables_.empty() && !(table.spec == spec())) {
        throw input_error("mixed regression specs in one table set");
    }
    tables_[table.sample_size] = std::move(table);
}

const RegressionSpec& TableSet::spec() const {
    if (tables_.empty()) throw precondition_error("empty table set");
    return tables_.begin()->second.spec;
}

std::vector<std::size_t> TableSet::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(tables_.size());
    for (const auto& [size, _] : tables_) out.push_back(size);
    return out;
}

namespace {

// Bracketing tabulated sizes for T (clamped to the available range).
std::pair<const QuantileTable*, const QuantileTable*> bracket(
    const std::map<std::size_t, QuantileTable>& tables, std::size_t T) {
    auto hi = tables.lower_bound(T);
    if (hi == tables.end()) {
        const auto* last = &std::prev(tables.end())->second;
        return {last, last};
    }
    if (hi->first == T || hi == tables.begin()) return {&hi->second, &hi->second};
    return {&std::prev(hi)->second, &hi->second};
}

double size_weight(std::size_t lo, std::size_t hi, std::size_t T) {
    if (lo == hi) return 0.0;
    return (static_cast<double>(T) - static_cast<double>(lo)) /
           (static_cast<double>(hi) - static_cast<double>(lo));
}

double table_p(const QuantileTable& t, double stat, bool* clamped) {
    const auto& q = t.quantiles;
    if (stat <= q.front().second) {
        if (stat < q.front().second && clamped) *clamped = true;
        return q.front().first;
    }
    if (stat >= q.back().second) {
        if (stat > q.back().second && clamped) *clamped = true;
        return q.back().first;
    }
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (stat <= q[i].second) {
            const double w = (stat - q[i - 1].second) / (q[i].second - q[i - 1].second);
            return q[i - 1].first + w * (q[i].first - q[i - 1].first);
        }
    }
    return q.back().first;
}

}  // namespace

double TableSet::critical_value(double alpha, std::size_t T) const {
    if (tables_.empty()) throw precondition_error("empty table set");
    const auto [lo, hi] = bracket(tables_, T);
    const double w = size_weight(lo->sample_size, hi->sample_size, T);
    return (1.0 - w) * lo->quantile(alpha) + w * hi->quantile(alpha);
}

double TableSet::p_value(double stat, std::size_t T, bool* clamped) const {
    if (tables_.empty()) throw precondition_error("empty table set");
    if (clamped) *clamped = false;
    const auto [lo, hi] = bracket(tables_, T);
    const double w = size_weight(lo->sample_size, hi->sample_size, T);
    const double p_lo = table_p(*lo, stat, clamped);
    const double p_hi = table_p(*hi, stat, clamped);
    return (1.0 - w) * p_lo + w * p_hi;
}

TableSet TableSet::load_dir(const std::string& dir, const RegressionSpec& spec) {
    TableSet set;
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) return set;
    const std::string prefix = "adf_" + spec.key() + "_T";
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        std::stringstream buf;
        buf << in.rdbuf();
        QuantileTable t = QuantileTable::from_json(buf.str());
        if (t.spec == spec) set.add(std::move(t));
    }
    return set;
}

const std::vector<double>& TableSet::standard_levels() {
    static const std::vector<double> levels = {
        0.001, 0.005, 0.01,  0.02, 0.025, 0.03, 0.04, 0.05,  0.06, 0.07,
        0.08,  0.09,  0.10,  0.125, 0.15, 0.20, 0.25, 0.30,  0.35, 0.40,
        0.45,  0.50,  0.55,  0.60, 0.65,  0.70, 0.75, 0.80,  0.85, 0.90,
        0.925, 0.95,  0.975, 0.99, 0.995, 0.999};
    return levels;
}

QuantileTable simulate_table(const RegressionSpec& spec, std::size_t T,
                             std::size_t replications, std::uint64_t seed) {
    if (T < 10) throw precondition_error("table sample size too small");
    if (replications < 100) throw precondition_error("too few table replications");
    std::vector<double> stats(replications);
#pragma omp parallel for schedule(static)
    for (long long rep = 0; rep < static_cast<long long>(replications); ++rep) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(rep)}));
        std::vector<double> y(T);
        double acc = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            acc += rng.normal();
            y[t] = acc;
        }
        stats[static_cast<std::size_t>(rep)] = df_statistic(y, spec);
    }
    std::sort(stats.begin(), stats.end());

    QuantileTable table;
    table.spec = spec;
    table.sample_size = T;
    table.replications = replications;
    table.seed = seed;
    for (double level : TableSet::standard_levels()) {
        // Type-7 empirical quantile (linear interpolation of order statistics).
        const double h = level * static_cast<double>(replications - 1);
        const std::size_t i = static_cast<std::size_t>(h);
        const double frac = h - static_cast<double>(i);
        const double q = (i + 1 < replications)
                             ? stats[i] + frac * (stats[i + 1] - stats[i])
                             : stats[i];
        table.quantiles.emplace_back(level, q);
    }
    return table;
}

TestResult adf_test(const std::vector<double>& y, const RegressionSpec& spec,
                    const TableSet& tables, double alpha) {
    if (!(tables.spec() == spec)) {
        throw precondition_error("table set does not match the regression spec");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0, 1)");
    const DfFit fit = df_fit(y, spec);
    TestResult r;
    r.statistic = fit.statistic;
    r.rho_hat = fit.rho_hat;
    r.sigma2_hat = fit.sigma2_hat;
    r.effective_obs = y.size();
    r.p_value = tables.p_value(fit.statistic, y.size(), &r.p_clamped);
    return r;
}

}  // namespace unitroot
