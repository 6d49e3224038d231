// Command-line front end: test a series from CSV, run delta-sensitivity
// sweeps, build Dickey-Fuller quantile tables, and drive simulation grids.
//
// Exit codes: 0 success, 2 input error, 3 method precondition violation,
// 4 internal numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "unitroot/adf.hpp"
#include "unitroot/baselines.hpp"
#include "unitroot/core.hpp"
#include "unitroot/csv.hpp"
#include "unitroot/mleem.hpp"
#include "unitroot/missingness.hpp"
#include "unitroot/obslik.hpp"
#include "unitroot/rng.hpp"
#include "unitroot/simharness.hpp"
#include "unitroot/ssmimpute.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonOptions {
    std::string input;
    std::string column;
    std::string method = "all";
    int lag_order = 1;
    int imputations = 5;
    std::vector<double> deltas;
    std::string delta_kind = "none";
    double lambda = 0.0;
    double alpha = 0.05;
    bool spec_constant = false;
    bool spec_trend = false;
    int spec_lags = 0;
    std::uint64_t seed = 20240501;
    std::string table_dir;
    std::string out;
    std::string format = "json";
};

unitroot::RegressionSpec spec_of(const CommonOptions& o) {
    unitroot::RegressionSpec s;
    s.constant = o.spec_constant;
    s.trend = o.spec_trend;
    s.lags = o.spec_lags;
    return s;
}

std::string resolve_table_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("UNITROOT_TABLE_DIR")) return env;
    return "tables";
}

unitroot::TableSet load_tables(const std::string& dir,
                               const unitroot::RegressionSpec& spec) {
    unitroot::TableSet t = unitroot::TableSet::load_dir(dir, spec);
    if (t.empty()) {
        throw unitroot::input_error(
            "no quantile tables for spec '" + spec.key() + "' in '" + dir +
            "'; build them with the `quantiles` subcommand or point --table / "
            "UNITROOT_TABLE_DIR at a table directory");
    }
    return t;
}

unitroot::DeltaSpec delta_of(const CommonOptions& o, double delta_value) {
    unitroot::DeltaSpec d;
    if (o.delta_kind == "none") {
        if (delta_value != 0.0) {
            d.kind = unitroot::DeltaKind::constant;
            d.delta = delta_value;
        }
    } else if (o.delta_kind == "constant") {
        d.kind = delta_value == 0.0 ? unitroot::DeltaKind::none
                                    : unitroot::DeltaKind::constant;
        d.delta = delta_value;
    } else if (o.delta_kind == "truncation") {
        d.kind = unitroot::DeltaKind::truncation;
        d.lambda = o.lambda;
    } else {
        throw unitroot::input_error("unknown delta kind: " + o.delta_kind);
    }
    d.shape = unitroot::DeltaShape::peak;
    return d;
}

ordered_json config_json(const CommonOptions& o, const std::string& table_dir) {
    ordered_json c;
    c["input"] = o.input;
    if (!o.column.empty()) c["column"] = o.column;
    c["method"] = o.method;
    c["lag_order"] = o.lag_order;
    c["imputations"] = o.imputations;
    c["delta_kind"] = o.delta_kind;
    if (o.delta_kind == "truncation") c["lambda"] = o.lambda;
    if (!o.deltas.empty()) c["delta"] = o.deltas;
    c["alpha"] = o.alpha;
    c["regression"] = spec_of(o).key();
    c["seed"] = o.seed;
    c["table_dir"] = table_dir;
    return c;
}

ordered_json result_json(const unitroot::TestResult& r, double alpha) {
    ordered_json j;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["rho_hat"] = r.rho_hat;
    j["sigma2_hat"] = r.sigma2_hat;
    j["effective_obs"] = r.effective_obs;
    j["p_clamped"] = r.p_clamped;
    j["reject"] = r.p_value < alpha;
    return j;
}

void write_output(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream f(out);
    if (!f) throw unitroot::input_error("cannot write " + out);
    f << text << "\n";
}

unitroot::TestResult run_one(const std::string& name, const unitroot::Series& s,
                             const unitroot::TableSet& tables,
                             const CommonOptions& o, double delta_value) {
    using namespace unitroot;
    const RegressionSpec reg = spec_of(o);
    const Method m = parse_method(name);
    Rng rng(derive_seed(o.seed, {hash_tag(name)}));
    switch (m) {
        case Method::cc: return complete_case_test(s, tables, o.alpha, reg);
        case Method::mean: return mean_test(s, tables, o.alpha, reg);
        case Method::locf: return locf_test(s, tables, o.alpha, reg);
        case Method::intl: return linear_test(s, tables, o.alpha, reg);
        case Method::ints: return spline_test(s, tables, o.alpha, reg);
        case Method::kalman: return kalman_test(s, tables, o.alpha, reg);
        case Method::mice: {
            MiceOptions mo;
            mo.m = o.imputations;
            return mice_test(s, tables, rng, o.alpha, mo, reg);
        }
        case Method::mlen: return mlen_test(s, tables, o.alpha);
        case Method::mlens: return mlens_test(s, tables, o.alpha);
        case Method::mleem:
            return mleem_test(s, tables, o.alpha, delta_of(o, delta_value), reg);
        case Method::ssm: {
            SsmOptions so;
            so.lag_order = o.lag_order;
            so.imputations = o.imputations;
            so.delta = delta_of(o, delta_value);
            return ssm_test(s, tables, rng, so, o.alpha, reg);
        }
    }
    throw unitroot::input_error("unknown method: " + name);
}

int cmd_test(const CommonOptions& o) {
    using namespace unitroot;
    const Series s = read_series_csv_file(o.input, o.column);
    const std::string table_dir = resolve_table_dir(o.table_dir);
    const TableSet tables = load_tables(table_dir, spec_of(o));
    const double delta_value = o.deltas.empty() ? 0.0 : o.deltas.front();

    ordered_json out;
    out["config"] = config_json(o, table_dir);

    // Residual diagnostic on the complete-case fit: the MLE-based methods
    // assume normal errors and over-reject when that fails.
    bool normality_warning = false;
    try {
        const DfFit fit = df_fit(s.observed_values(), spec_of(o));
        const double skew = skewness(fit.residuals);
        const double exk = excess_kurtosis(fit.residuals);
        normality_warning = std::abs(skew) > 1.0 || std::abs(exk) > 2.0;
        ordered_json diag;
        diag["skewness"] = skew;
        diag["excess_kurtosis"] = exk;
        diag["warning"] = normality_warning;
        out["residual_normality"] = diag;
    } catch (const std::exception&) {
        out["residual_normality"] = nullptr;
    }
    if (normality_warning) {
        std::cerr << "warning: complete-case residuals look non-normal; "
                     "MLEN/MLENS/MLEEM assume normal errors and may "
                     "over-reject\n";
    }

    std::vector<std::string> names;
    if (o.method == "all") {
        names = {"cc",   "mean", "locf",  "intl",  "ints", "kalman",
                 "mice", "mlen", "mlens", "mleem", "ssm"};
    } else {
        names.push_back(method_name(parse_method(o.method)));
    }

    ordered_json results;
    for (const std::string& name : names) {
        if (o.method == "all") {
            try {
                results[name] = result_json(run_one(name, s, tables, o, delta_value),
                                            o.alpha);
            } catch (const std::exception& e) {
                ordered_json err;
                err["error"] = e.what();
                results[name] = err;
            }
        } else {
            results[name] =
                result_json(run_one(name, s, tables, o, delta_value), o.alpha);
        }
    }
    out["results"] = results;

    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "method,statistic,p_value,rho_hat,effective_obs,reject\n";
        for (const auto& [name, r] : results.items()) {
            if (r.contains("error")) continue;
            csv << name << ',' << r["statistic"].dump() << ','
                << r["p_value"].dump() << ',' << r["rho_hat"].dump() << ','
                << r["effective_obs"].dump() << ','
                << (r["reject"].get<bool>() ? 1 : 0) << '\n';
        }
        write_output(o.out, csv.str());
    } else {
        write_output(o.out, out.dump(2));
    }
    return 0;
}

int cmd_sensitivity(const CommonOptions& o) {
    using namespace unitroot;
    if (o.method != "mleem" && o.method != "ssm") {
        throw input_error("sensitivity analysis supports --method mleem or ssm");
    }
    if (o.delta_kind == "truncation") {
        throw input_error(
            "the sensitivity sweep varies a constant delta; run the truncation "
            "kind through the `test` subcommand with --lambda");
    }
    const Series s = read_series_csv_file(o.input, o.column);
    const std::string table_dir = resolve_table_dir(o.table_dir);
    const TableSet tables = load_tables(table_dir, spec_of(o));
    std::vector<double> deltas = o.deltas;
    if (deltas.empty()) deltas = {0.0, 0.05, 0.1, 0.2, 0.3};

    ordered_json out;
    out["config"] = config_json(o, table_dir);
    ordered_json rows = ordered_json::array();
    for (double d : deltas) {
        const TestResult r = run_one(o.method, s, tables, o, d);
        ordered_json row = result_json(r, o.alpha);
        row["delta"] = d;
        rows.push_back(row);
    }
    out["sweep"] = rows;

    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "delta,statistic,p_value,rho_hat,reject\n";
        for (const auto& row : rows) {
            csv << row["delta"].dump() << ',' << row["statistic"].dump() << ','
                << row["p_value"].dump() << ',' << row["rho_hat"].dump() << ','
                << (row["reject"].get<bool>() ? 1 : 0) << '\n';
        }
        write_output(o.out, csv.str());
    } else {
        write_output(o.out, out.dump(2));
    }
    return 0;
}

// Flat key = value config mirroring SimGrid; '#' starts a comment.
unitroot::SimGrid parse_sim_config(const std::string& path, bool* sensitivity) {
    using namespace unitroot;
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config " + path);
    SimGrid grid;
    *sensitivity = false;
    const std::set<std::string> known = {
        "T",      "rhos",         "mechanisms", "rates",
        "methods", "replications", "deltas",     "alpha",
        "base_seed", "keep_replicates", "regression", "sensitivity"};
    std::vector<std::string> unknown;
    std::string line;
    std::size_t lineno = 0;
    auto split_list = [](const std::string& text) {
        std::vector<std::string> items;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            const auto e = item.find_last_not_of(" \t");
            if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
        }
        return items;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw input_error("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        auto trim = [](std::string t) {
            const auto b = t.find_first_not_of(" \t\r");
            const auto e = t.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known.count(key)) {
            unknown.push_back(key);
            continue;
        }
        try {
            if (key == "T") {
                grid.T = std::stoul(value);
            } else if (key == "rhos") {
                grid.rhos.clear();
                for (const auto& v : split_list(value)) grid.rhos.push_back(std::stod(v));
            } else if (key == "mechanisms") {
                grid.mechanisms.clear();
                for (const auto& v : split_list(value)) {
                    grid.mechanisms.push_back(parse_mechanism(v));
                }
            } else if (key == "rates") {
                grid.rates.clear();
                for (const auto& v : split_list(value)) grid.rates.push_back(std::stod(v));
            } else if (key == "methods") {
                grid.methods.clear();
                for (const auto& v : split_list(value)) grid.methods.push_back(parse_method(v));
            } else if (key == "replications") {
                grid.replications = std::stoul(value);
            } else if (key == "deltas") {
                grid.deltas.clear();
                for (const auto& v : split_list(value)) grid.deltas.push_back(std::stod(v));
            } else if (key == "alpha") {
                grid.alpha = std::stod(value);
            } else if (key == "base_seed") {
                grid.base_seed = std::stoull(value);
            } else if (key == "keep_replicates") {
                grid.keep_replicates = value == "true" || value == "1";
            } else if (key == "regression") {
                grid.regression = RegressionSpec::parse(value);
            } else if (key == "sensitivity") {
                *sensitivity = value == "true" || value == "1";
            }
        } catch (const input_error&) {
            throw;
        } catch (const std::exception&) {
            throw input_error("config line " + std::to_string(lineno) +
                              ": cannot parse value for '" + key + "'");
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw input_error(msg);
    }
    return grid;
}

int cmd_simulate(const std::string& config_path, const CommonOptions& o) {
    using namespace unitroot;
    bool sensitivity = false;
    SimGrid grid = parse_sim_config(config_path, &sensitivity);
    if (o.out.empty()) throw input_error("--out directory is required");
    const std::string table_dir = resolve_table_dir(o.table_dir);
    const TableSet tables = load_tables(table_dir, grid.regression);

    if (!sensitivity) {
        std::size_t done = 0;
        run_grid(grid, tables, o.out, [&](const CellResult& cell) {
            ++done;
            std::cerr << cell.key.label() << ": reject="
                      << cell.rejection_rate << " failures=" << cell.failures
                      << "\n";
        });
        std::cerr << "grid complete (" << done << " new cells) -> " << o.out
                  << "\n";
        return 0;
    }

    for (Mechanism m : grid.mechanisms) {
        if (m == Mechanism::mcar || m == Mechanism::mar) {
            throw input_error(
                "sensitivity grids use the MNAR mechanisms (mnar-d, mnar-t, "
                "mnar-p, mnar-h)");
        }
    }
    fs::create_directories(o.out);
    std::vector<double> deltas = {0.0};
    deltas.insert(deltas.end(), grid.deltas.begin(), grid.deltas.end());
    std::ofstream csv(fs::path(o.out) / "sensitivity.csv");
    csv << "mechanism,rho,rate,method,delta,replications,failures,"
           "rejection_rate,median_p,mean_rho_hat\n";
    for (Mechanism mech : grid.mechanisms) {
        for (double rate : grid.rates) {
            for (double rho : grid.rhos) {
                for (Method method : grid.methods) {
                    if (method != Method::mleem && method != Method::ssm) continue;
                    for (double d : deltas) {
                        CellKey key{rho, mech, rate, method};
                        std::ostringstream name;
                        name << "sens_" << key.label() << "_d" << d << ".json";
                        const fs::path file = fs::path(o.out) / name.str();
                        SensitivityResult r;
                        if (fs::exists(file)) {
                            continue;
                        }
                        r = run_sensitivity_cell(grid, key, d, tables);
                        std::ofstream jf(file);
                        jf << r.to_json() << "\n";
                        csv << mechanism_name(mech) << ',' << rho << ',' << rate
                            << ',' << method_name(method) << ',' << d << ','
                            << r.replications << ',' << r.failures << ','
                            << r.rejection_rate << ',' << r.median_p << ','
                            << r.mean_rho_hat << "\n";
                        std::cerr << name.str() << ": median_p=" << r.median_p
                                  << "\n";
                    }
                }
            }
        }
    }
    return 0;
}

int cmd_quantiles(const CommonOptions& o, const std::vector<std::size_t>& sizes,
                  std::size_t reps) {
    using namespace unitroot;
    const RegressionSpec spec = spec_of(o);
    const std::string table_dir =
        o.out.empty() ? resolve_table_dir(o.table_dir) : o.out;
    fs::create_directories(table_dir);
    for (std::size_t size : sizes) {
        QuantileTable table = simulate_table(spec, size, reps, o.seed);
        ordered_json j = ordered_json::parse(table.to_json());
        if (reps < 10000) {
            j["low_precision"] = true;
            std::cerr << "warning: " << reps
                      << " replications is low for a quantile table; flagged\n";
        }
        const fs::path file = fs::path(table_dir) /
                              ("adf_" + spec.key() + "_T" + std::to_string(size) +
                               ".json");
        std::ofstream f(file);
        if (!f) throw input_error("cannot write " + file.string());
        f << j.dump(2) << "\n";
        std::cerr << "wrote " << file.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Unit-root (augmented Dickey-Fuller) testing for univariate series "
        "with missing observations"};
    app.require_subcommand(1);

    CommonOptions o;
    std::string config_path;
    std::vector<std::size_t> q_sizes = {500};
    std::size_t q_reps = 100000;

    auto add_common = [&](CLI::App* sub, bool with_input) {
        if (with_input) {
            sub->add_option("--input,-i", o.input, "input CSV path")->required();
            sub->add_option("--column", o.column, "CSV column name");
        }
        sub->add_option("--method,-m", o.method, "method name or 'all'");
        sub->add_option("--lag-order", o.lag_order, "state-space lag order q");
        sub->add_option("--imputations", o.imputations, "imputation count m");
        sub->add_option("--delta", o.deltas, "delta value(s) for sensitivity");
        sub->add_option("--delta-kind", o.delta_kind,
                        "none | constant | truncation");
        sub->add_option("--lambda", o.lambda, "truncation threshold lambda");
        sub->add_option("--alpha", o.alpha, "significance level");
        sub->add_flag("--spec-constant", o.spec_constant,
                      "include a constant in the DF regression");
        sub->add_flag("--spec-trend", o.spec_trend,
                      "include a linear trend in the DF regression");
        sub->add_option("--spec-lags", o.spec_lags, "augmentation lag count");
        sub->add_option("--seed", o.seed, "base random seed");
        sub->add_option("--table", o.table_dir,
                        "quantile table directory (default: UNITROOT_TABLE_DIR "
                        "or ./tables)");
        sub->add_option("--out,-o", o.out, "output file (default stdout)");
        sub->add_option("--format", o.format, "json | csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* test = app.add_subcommand("test", "run unit-root tests on a CSV series");
    add_common(test, true);

    CLI::App* sens = app.add_subcommand(
        "sensitivity", "delta-sensitivity sweep for mleem or ssm on a CSV series");
    add_common(sens, true);

    CLI::App* sim = app.add_subcommand("simulate", "run a simulation grid from a config");
    sim->add_option("--config", config_path, "flat key = value config file")
        ->required();
    add_common(sim, false);

    CLI::App* quant = app.add_subcommand("quantiles", "build DF quantile tables");
    quant->add_option("--size", q_sizes, "sample size(s) to tabulate");
    quant->add_option("--reps", q_reps, "Monte-Carlo replications");
    add_common(quant, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (test->parsed()) return cmd_test(o);
        if (sens->parsed()) return cmd_sensitivity(o);
        if (sim->parsed()) return cmd_simulate(config_path, o);
        if (quant->parsed()) return cmd_quantiles(o, q_sizes, q_reps);
    } catch (const unitroot::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const unitroot::precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const unitroot::numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
