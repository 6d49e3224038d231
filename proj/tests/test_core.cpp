#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "unitroot/core.hpp"
#include "unitroot/csv.hpp"
#include "unitroot/rng.hpp"

using namespace unitroot;

TEST_CASE("Series blanks masked values with NaN") {
    Series s({1.0, 2.0, 3.0, 4.0}, {true, false, true, false});
    CHECK(s.size() == 4);
    CHECK(s.n_observed() == 2);
    CHECK(s.n_missing() == 2);
    CHECK(!s.complete());
    CHECK(std::isnan(s.y[1]));
    CHECK(std::isnan(s.y[3]));
    CHECK(s.y[0] == 1.0);
    CHECK(s.observed_indices() == std::vector<std::size_t>{0, 2});
    CHECK(s.observed_values() == std::vector<double>{1.0, 3.0});
}

TEST_CASE("Series from values alone treats NaN as missing") {
    Series s({1.0, kNaN, 3.0});
    CHECK(s.n_observed() == 2);
    CHECK(!s.observed[1]);
    CHECK(s.observed[0]);
}

TEST_CASE("Series rejects mismatched mask length") {
    CHECK_THROWS_AS(Series({1.0, 2.0}, {true}), input_error);
}

TEST_CASE("moment helpers") {
    const std::vector<double> v = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    CHECK(mean(v) == doctest::Approx(5.0));
    CHECK(variance(v, 0) == doctest::Approx(4.0));
    CHECK(variance(v, 1) == doctest::Approx(32.0 / 7.0));
    // Symmetric data: zero skewness; normal-like tails: negative excess
    // kurtosis for this short symmetric sample.
    const std::vector<double> sym = {-2.0, -1.0, 0.0, 1.0, 2.0};
    CHECK(skewness(sym) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(excess_kurtosis(sym) == doctest::Approx(-1.3).epsilon(1e-9));
}

TEST_CASE("RegressionSpec key round trip") {
    for (const RegressionSpec spec : {RegressionSpec{false, false, 0},
                                      RegressionSpec{true, false, 2},
                                      RegressionSpec{true, true, 0}}) {
        CHECK(RegressionSpec::parse(spec.key()) == spec);
    }
    CHECK(RegressionSpec{false, false, 0}.key() == "nc0");
    CHECK(RegressionSpec{true, false, 0}.key() == "c0");
    CHECK(RegressionSpec{true, true, 3}.key() == "ct3");
    CHECK_THROWS_AS(RegressionSpec::parse("bogus"), input_error);
}

TEST_CASE("Rng reproducibility and stream independence") {
    Rng a(42), b(42), c(43);
    std::vector<double> va, vb;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.normal());
        vb.push_back(b.normal());
    }
    CHECK(va == vb);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        if (c.normal() != va[static_cast<std::size_t>(i)]) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("Rng uniform range and rough moments") {
    Rng r(7);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(s2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("Rng chi-square mean matches dof") {
    Rng r(11);
    const double dof = 6.0;
    double s = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) s += r.chi_square(dof);
    CHECK(s / n == doctest::Approx(dof).epsilon(0.05));
}

TEST_CASE("derive_seed separates streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {1ull, 2ull}) {
        for (std::uint64_t tag : {0ull, 1ull, 2ull, 99ull}) {
            seen.insert(derive_seed(base, {tag}));
            seen.insert(derive_seed(base, {tag, tag}));
        }
    }
    CHECK(seen.size() == 16);
    CHECK(derive_seed(5, {1, 2}) == derive_seed(5, {1, 2}));
    CHECK(derive_seed(5, {1, 2}) != derive_seed(5, {2, 1}));
    CHECK(hash_tag("innov") != hash_tag("mask"));
}

TEST_CASE("CSV: plain single column") {
    std::istringstream in("1.5\n2.5\nNA\n4\n");
    const Series s = read_series_csv(in);
    CHECK(s.size() == 4);
    CHECK(s.y[0] == 1.5);
    CHECK(!s.observed[2]);
    CHECK(s.y[3] == 4.0);
}

TEST_CASE("CSV: header detection and named column") {
    std::istringstream in("date,value\n2020-01,1\n2020-02,\n2020-03,3\n");
    const Series s = read_series_csv(in, "value");
    CHECK(s.size() == 3);
    CHECK(s.y[0] == 1.0);
    CHECK(!s.observed[1]);
    CHECK(s.y[2] == 3.0);
}

TEST_CASE("CSV: quoted fields and CRLF") {
    std::istringstream in("\"v\"\r\n\"1.0\"\r\n\"2.0\"\r\n");
    const Series s = read_series_csv(in, "v");
    CHECK(s.size() == 2);
    CHECK(s.y[1] == 2.0);
}

TEST_CASE("CSV: parse failure reports the row") {
    std::istringstream in("x\n1\nletters\n3\n");
    try {
        read_series_csv(in, "x");
        CHECK(false);
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("CSV: missing named column and short inputs") {
    std::istringstream in1("a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(read_series_csv(in1, "zzz"), input_error);
    std::istringstream in2("x\n1\n");
    CHECK_THROWS_AS(read_series_csv(in2, "x"), input_error);
}
