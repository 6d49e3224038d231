#include "unitroot/simharness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "unitroot/baselines.hpp"
#include "unitroot/mleem.hpp"
#include "unitroot/obslik.hpp"
#include "unitroot/rng.hpp"
#include "unitroot/ssmimpute.hpp"

namespace fs = std::filesystem;

namespace unitroot {

Method parse_method(const std::string& name) {
    if (name == "cc") return Method::cc;
    if (name == "mean") return Method::mean;
    if (name == "locf") return Method::locf;
    if (name == "intl") return Method::intl;
    if (name == "ints") return Method::ints;
    if (name == "kalman" || name == "k") return Method::kalman;
    if (name == "mice") return Method::mice;
    if (name == "mlen") return Method::mlen;
    if (name == "mlens") return Method::mlens;
    if (name == "mleem") return Method::mleem;
    if (name == "ssm" || name == "ssmimpute") return Method::ssm;
    throw input_error("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::cc: return "cc";
        case Method::mean: return "mean";
        case Method::locf: return "locf";
        case Method::intl: return "intl";
        case Method::ints: return "ints";
        case Method::kalman: return "kalman";
        case Method::mice: return "mice";
        case Method::mlen: return "mlen";
        case Method::mlens: return "mlens";
        case Method::mleem: return "mleem";
        case Method::ssm: return "ssm";
    }
    throw input_error("unknown method enum value");
}

Series gen_ar1(std::size_t T, double rho, double sigma, std::uint64_t seed) {
    if (T < 2) throw input_error("series length must be at least 2");
    if (sigma < 0.0) throw input_error("sigma must be nonnegative");
    Rng rng(seed);
    Series s;
    s.y.assign(T, 0.0);
    s.observed.assign(T, true);
    for (std::size_t t = 1; t < T; ++t) {
        s.y[t] = rho * s.y[t - 1] + sigma * rng.normal();
    }
    return s;
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double sorted_quantile(const std::vector<double>& sorted, double level) {
    // Type-7 quantile on pre-sorted data.
    const std::size_t n = sorted.size();
    if (n == 0) return kNaN;
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * level;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double w = h - std::floor(h);
    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

double sorted_median(const std::vector<double>& sorted) {
    return sorted_quantile(sorted, 0.5);
}

std::uint64_t tag_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

struct RepOutcome {
    bool failed = false;
    bool rejected = false;
    double statistic = kNaN;
    double p_value = kNaN;
    double rho_hat = kNaN;
    std::string reason;
};

TestResult dispatch(Method m, const Series& s, const TableSet& tables,
                    const SimGrid& grid, Rng& method_rng, double delta) {
    const RegressionSpec& reg = grid.regression;
    const double a = grid.alpha;
    switch (m) {
        case Method::cc: return complete_case_test(s, tables, a, reg);
        case Method::mean: return mean_test(s, tables, a, reg);
        case Method::locf: return locf_test(s, tables, a, reg);
        case Method::intl: return linear_test(s, tables, a, reg);
        case Method::ints: return spline_test(s, tables, a, reg);
        case Method::kalman: return kalman_test(s, tables, a, reg);
        case Method::mice: return mice_test(s, tables, method_rng, a, {}, reg);
        case Method::mlen: return mlen_test(s, tables, a);
        case Method::mlens: return mlens_test(s, tables, a);
        case Method::mleem: {
            DeltaSpec d;
            if (delta > 0.0) {
                d.kind = DeltaKind::constant;
                d.delta = delta;
                d.shape = DeltaShape::peak;
            }
            return mleem_test(s, tables, a, d, reg);
        }
        case Method::ssm: {
            SsmOptions o;
            if (delta > 0.0) {
                o.delta.kind = DeltaKind::constant;
                o.delta.delta = delta;
                o.delta.shape = DeltaShape::peak;
            }
            return ssm_test(s, tables, method_rng, o, a, reg);
        }
    }
    throw input_error("unknown method enum value");
}

RepOutcome run_replication(const SimGrid& grid, const CellKey& key,
                           const TableSet& tables, double delta,
                           std::size_t rep) {
    const std::uint64_t rho_tag = tag_bits(key.rho);
    const std::uint64_t rate_tag = tag_bits(key.rate);
    const std::uint64_t mech_tag = hash_tag(mechanism_name(key.mechanism));
    RepOutcome out;
    try {
        const std::uint64_t innov_seed = derive_seed(
            grid.base_seed, {hash_tag("innov"), rho_tag, mech_tag, rate_tag, rep});
        Series s = gen_ar1(grid.T, key.rho, 1.0, innov_seed);

        Rng mask_rng(derive_seed(
            grid.base_seed, {hash_tag("mask"), rho_tag, mech_tag, rate_tag, rep}));
        std::vector<bool> mask = generate_mask(key.mechanism, s.y, key.rate, mask_rng);
        s = Series(std::move(s.y), std::move(mask));

        Rng method_rng(derive_seed(
            grid.base_seed, {hash_tag("method"), hash_tag(method_name(key.method)),
                             rho_tag, mech_tag, rate_tag, rep}));
        const TestResult r = dispatch(key.method, s, tables, grid, method_rng, delta);
        out.statistic = r.statistic;
        out.p_value = r.p_value;
        out.rho_hat = r.rho_hat;
        out.rejected = r.p_value < grid.alpha;
    } catch (const std::exception& e) {
        out.failed = true;
        out.reason = e.what();
    }
    return out;
}

std::vector<RepOutcome> run_reps(const SimGrid& grid, const CellKey& key,
                                 const TableSet& tables, double delta,
                                 bool parallel) {
    std::vector<RepOutcome> reps(grid.replications);
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (long long i = 0; i < static_cast<long long>(grid.replications); ++i) {
            reps[static_cast<std::size_t>(i)] =
                run_replication(grid, key, tables, delta, static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < grid.replications; ++i) {
            reps[i] = run_replication(grid, key, tables, delta, i);
        }
    }
    return reps;
}

CellResult aggregate(const SimGrid& grid, const CellKey& key,
                     const std::vector<RepOutcome>& reps) {
    CellResult r;
    r.key = key;
    r.replications = reps.size();
    std::vector<double> stats, ps, rhos;
    std::size_t rejected = 0;
    for (const auto& rep : reps) {
        if (rep.failed) {
            ++r.failures;
            if (r.failure_reasons.size() < 5 &&
                std::find(r.failure_reasons.begin(), r.failure_reasons.end(),
                          rep.reason) == r.failure_reasons.end()) {
                r.failure_reasons.push_back(rep.reason);
            }
            continue;
        }
        stats.push_back(rep.statistic);
        ps.push_back(rep.p_value);
        rhos.push_back(rep.rho_hat);
        if (rep.rejected) ++rejected;
    }
    const std::size_t used = stats.size();
    r.unusable = r.failures * 10 > r.replications;
    if (used > 0) {
        r.rejection_rate = static_cast<double>(rejected) / static_cast<double>(used);
        r.mean_rho_hat = mean(rhos);
        r.sd_rho_hat = used > 1 ? std::sqrt(variance(rhos)) : 0.0;
        if (grid.keep_replicates) r.replicate_statistics = stats;
        std::sort(stats.begin(), stats.end());
        std::sort(ps.begin(), ps.end());
        r.median_p = sorted_median(ps);
        r.median_statistic = sorted_median(stats);
        for (double level : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            r.statistic_quantiles.emplace_back(level, sorted_quantile(stats, level));
        }
    }
    return r;
}

}  // namespace

std::string CellKey::label() const {
    std::string rate_part = format_number(rate * 100.0);
    return mechanism_name(mechanism) + rate_part + "_rho" + format_number(rho) +
           "_" + method_name(method);
}

CellResult run_cell(const SimGrid& grid, const CellKey& key, const TableSet& tables) {
    return aggregate(grid, key, run_reps(grid, key, tables, 0.0, true));
}

CellResult run_cell_serial(const SimGrid& grid, const CellKey& key,
                           const TableSet& tables) {
    return aggregate(grid, key, run_reps(grid, key, tables, 0.0, false));
}

SensitivityResult run_sensitivity_cell(const SimGrid& grid, const CellKey& key,
                                       double delta, const TableSet& tables) {
    if (key.method != Method::mleem && key.method != Method::ssm) {
        throw input_error("sensitivity analysis applies to mleem and ssm only");
    }
    const CellResult cell =
        aggregate(grid, key, run_reps(grid, key, tables, delta, true));
    SensitivityResult r;
    r.key = key;
    r.delta = delta;
    r.replications = cell.replications;
    r.failures = cell.failures;
    r.rejection_rate = cell.rejection_rate;
    r.median_p = cell.median_p;
    r.mean_rho_hat = cell.mean_rho_hat;
    return r;
}

std::string CellResult::to_json() const {
    nlohmann::ordered_json j;
    j["rho"] = key.rho;
    j["mechanism"] = mechanism_name(key.mechanism);
    j["rate"] = key.rate;
    j["method"] = method_name(key.method);
    j["replications"] = replications;
    j["failures"] = failures;
    j["rejection_rate"] = rejection_rate;
    j["mean_rho_hat"] = mean_rho_hat;
    j["sd_rho_hat"] = sd_rho_hat;
    j["median_p"] = median_p;
    j["median_statistic"] = median_statistic;
    nlohmann::ordered_json q = nlohmann::ordered_json::object();
    for (const auto& [level, value] : statistic_quantiles) {
        q[format_number(level)] = value;
    }
    j["statistic_quantiles"] = q;
    j["unusable"] = unusable;
    if (!failure_reasons.empty()) j["failure_reasons"] = failure_reasons;
    if (!replicate_statistics.empty()) j["replicate_statistics"] = replicate_statistics;
    return j.dump(2);
}

CellResult CellResult::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    CellResult r;
    r.key.rho = j.at("rho").get<double>();
    r.key.mechanism = parse_mechanism(j.at("mechanism").get<std::string>());
    r.key.rate = j.at("rate").get<double>();
    r.key.method = parse_method(j.at("method").get<std::string>());
    r.replications = j.at("replications").get<std::size_t>();
    r.failures = j.at("failures").get<std::size_t>();
    r.rejection_rate = j.at("rejection_rate").get<double>();
    r.mean_rho_hat = j.at("mean_rho_hat").get<double>();
    r.sd_rho_hat = j.value("sd_rho_hat", kNaN);
    r.median_p = j.at("median_p").get<double>();
    r.median_statistic = j.at("median_statistic").get<double>();
    if (j.contains("statistic_quantiles")) {
        for (const auto& [k, v] : j.at("statistic_quantiles").items()) {
            r.statistic_quantiles.emplace_back(std::stod(k), v.get<double>());
        }
    }
    r.unusable = j.at("unusable").get<bool>();
    if (j.contains("failure_reasons")) {
        r.failure_reasons = j.at("failure_reasons").get<std::vector<std::string>>();
    }
    if (j.contains("replicate_statistics")) {
        r.replicate_statistics =
            j.at("replicate_statistics").get<std::vector<double>>();
    }
    return r;
}

std::string SensitivityResult::to_json() const {
    nlohmann::ordered_json j;
    j["rho"] = key.rho;
    j["mechanism"] = mechanism_name(key.mechanism);
    j["rate"] = key.rate;
    j["method"] = method_name(key.method);
    j["delta"] = delta;
    j["replications"] = replications;
    j["failures"] = failures;
    j["rejection_rate"] = rejection_rate;
    j["median_p"] = median_p;
    j["mean_rho_hat"] = mean_rho_hat;
    return j.dump(2);
}

void run_grid(const SimGrid& grid, const TableSet& tables, const std::string& out_dir,
              const std::function<void(const CellResult&)>& progress) {
    fs::create_directories(out_dir);
    std::vector<CellKey> keys;
    for (double rho : grid.rhos) {
        keys.push_back({rho, Mechanism::mcar, 0.0, Method::cc});
        for (Mechanism mech : grid.mechanisms) {
            for (double rate : grid.rates) {
                for (Method m : grid.methods) {
                    keys.push_back({rho, mech, rate, m});
                }
            }
        }
    }
    for (const CellKey& key : keys) {
        const fs::path file = fs::path(out_dir) / (key.label() + ".json");
        if (fs::exists(file)) continue;
        const CellResult res = run_cell(grid, key, tables);
        std::ofstream out(file);
        if (!out) throw input_error("cannot write " + file.string());
        out << res.to_json() << "\n";
        if (progress) progress(res);
    }
    write_grid_csv(out_dir, (fs::path(out_dir) / "grid.csv").string());
    emit_table(out_dir, (fs::path(out_dir) / "table_rejections.csv").string(), "csv");
    emit_table(out_dir, (fs::path(out_dir) / "table_rejections.json").string(), "json");
}

namespace {

std::vector<CellResult> load_cells(const std::string& out_dir) {
    std::vector<CellResult> cells;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        if (entry.path().extension() == ".json" &&
            entry.path().filename() != "table_rejections.json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            cells.push_back(CellResult::from_json(buf.str()));
        } catch (const std::exception&) {
            // Not a cell file; skip.
        }
    }
    std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
        const auto ka = std::make_tuple(mechanism_name(a.key.mechanism), a.key.rho,
                                        a.key.rate, method_name(a.key.method));
        const auto kb = std::make_tuple(mechanism_name(b.key.mechanism), b.key.rho,
                                        b.key.rate, method_name(b.key.method));
        return ka < kb;
    });
    return cells;
}

}  // namespace

void write_grid_csv(const std::string& out_dir, const std::string& csv_path) {
    const auto cells = load_cells(out_dir);
    std::ofstream out(csv_path);
    if (!out) throw input_error("cannot write " + csv_path);
    out << "mechanism,rho,rate,method,replications,failures,rejection_rate,"
           "mean_rho_hat,sd_rho_hat,median_p,median_statistic,unusable\n";
    for (const auto& c : cells) {
        out << mechanism_name(c.key.mechanism) << ',' << format_number(c.key.rho)
            << ',' << format_number(c.key.rate) << ',' << method_name(c.key.method)
            << ',' << c.replications << ',' << c.failures << ','
            << format_number(c.rejection_rate) << ',' << format_number(c.mean_rho_hat)
            << ',' << format_number(c.sd_rho_hat) << ',' << format_number(c.median_p)
            << ',' << format_number(c.median_statistic) << ','
            << (c.unusable ? 1 : 0) << '\n';
    }
}

void emit_table(const std::string& out_dir, const std::string& path,
                const std::string& format) {
    if (format != "csv" && format != "json") {
        throw input_error("table format must be csv or json");
    }
    const auto cells = load_cells(out_dir);
    // Row key: (mechanism, rho, rate); columns: methods in a fixed order.
    std::vector<Method> columns = {Method::cc,     Method::mleem, Method::mlen,
                                   Method::mlens,  Method::ssm,   Method::locf,
                                   Method::intl,   Method::ints,  Method::kalman,
                                   Method::mean,   Method::mice};
    std::map<std::tuple<std::string, double, double>, std::map<std::string, double>> rows;
    for (const auto& c : cells) {
        const auto key = std::make_tuple(std::string(mechanism_name(c.key.mechanism)),
                                         c.key.rho, c.key.rate);
        rows[key][method_name(c.key.method)] = c.rejection_rate;
    }
    if (format == "csv") {
        std::ofstream out(path);
        if (!out) throw input_error("cannot write " + path);
        out << "mechanism,rho,rate";
        for (Method m : columns) out << ',' << method_name(m);
        out << '\n';
        for (const auto& [key, vals] : rows) {
            out << std::get<0>(key) << ',' << format_number(std::get<1>(key)) << ','
                << format_number(std::get<2>(key));
            for (Method m : columns) {
                out << ',';
                const auto it = vals.find(method_name(m));
                if (it != vals.end() && std::isfinite(it->second)) {
                    out << format_number(it->second);
                }
            }
            out << '\n';
        }
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [key, vals] : rows) {
            nlohmann::ordered_json row;
            row["mechanism"] = std::get<0>(key);
            row["rho"] = std::get<1>(key);
            row["rate"] = std::get<2>(key);
            for (Method m : columns) {
                const auto it = vals.find(method_name(m));
                if (it != vals.end() && std::isfinite(it->second)) {
                    row[method_name(m)] = it->second;
                }
            }
            arr.push_back(row);
        }
        std::ofstream out(path);
        if (!out) throw input_error("cannot write " + path);
        out << arr.dump(2) << "\n";
    }
}

}  // namespace unitroot
