#include <doctest.h>

#include <cmath>
#include <fstream>

#include "bugcast/diagnostics.hpp"
#include "bugcast/error.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace bugcast;

namespace {

std::vector<double> read_fixture(const std::string& name) {
    std::ifstream in(testpaths::fixture(name));
    std::vector<double> out;
    for (double v; in >> v;) out.push_back(v);
    REQUIRE(out.size() == 500);
    return out;
}

WeeklySeries bundled() { return load_series_csv(testpaths::data("mozilla_arrivals.csv")); }

}  // namespace

TEST_SUITE("diagnostics") {

// Reference values come from an independent ADF implementation run on the same
// fixtures with the same maximum lag rule.
TEST_CASE("ADF on a seeded random walk matches the reference implementation") {
    const auto x = read_fixture("random_walk_500.txt");
    const auto r = adf_test(x, schwert_max_lag(x.size()));
    CHECK(r.statistic == doctest::Approx(-1.7566224989802717).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.4021999691262261).epsilon(1e-9));
    CHECK(r.chosen_lag == 0);
    CHECK(r.n_obs_used == 499);
    CHECK(r.critical_values.one_pct == doctest::Approx(-3.4435228622952065).epsilon(1e-12));
    CHECK(r.critical_values.five_pct == doctest::Approx(-2.867349510566146).epsilon(1e-12));
    CHECK(r.critical_values.ten_pct == doctest::Approx(-2.569864247011056).epsilon(1e-12));
    CHECK(r.p_value > 0.10);
    CHECK_FALSE(r.reject_at_5pct);
}

TEST_CASE("ADF on seeded white noise rejects the unit root") {
    const auto x = read_fixture("white_noise_500.txt");
    const auto r = adf_test(x, schwert_max_lag(x.size()));
    CHECK(r.statistic == doctest::Approx(-22.907589410544723).epsilon(1e-9));
    CHECK(r.chosen_lag == 0);
    CHECK(r.p_value < 0.01);
    CHECK(r.reject_at_5pct);
}

TEST_CASE("ADF on the bundled arrival series") {
    const auto s = bundled();
    CHECK(schwert_max_lag(s.size()) == 18);
    const auto r = adf_test(s);
    CHECK(r.statistic == doctest::Approx(-3.2507331842472595).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.01722955520891102).epsilon(1e-8));
    CHECK(r.chosen_lag == 8);
    CHECK(r.n_obs_used == 513);
    CHECK(r.critical_values.five_pct == doctest::Approx(-2.8671904981615706).epsilon(1e-12));
    CHECK(std::abs(r.p_value - 0.012) <= 0.01);
    CHECK(r.reject_at_5pct);
}

TEST_CASE("ADF invariants") {
    const auto x = oracle::ar_process(std::vector<double>{0.6}, 300, 5, 10.0);
    auto shifted = x;
    for (double& v : shifted) v += 1000.0;
    const auto a = adf_test(x, 8);
    const auto b = adf_test(shifted, 8);
    CHECK(std::abs(a.statistic - b.statistic) < 1e-8);
    CHECK(a.chosen_lag <= 8);
    CHECK(a.reject_at_5pct == (a.p_value < 0.05));
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
}

TEST_CASE("ADF errors") {
    const std::vector<double> five{1, 2, 3, 4, 5};
    try {
        adf_test(five, 0);
        FAIL("expected insufficient data");
    } catch (const InsufficientDataError& e) {
        CHECK(e.required() == 10);
    }
    CHECK_THROWS_AS(adf_test(std::vector<double>(40, 3.0), 2), Error);
    try {
        adf_test(std::vector<double>(40, 3.0), 2);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
    }
}

TEST_CASE("MacKinnon p-values are monotone and bounded") {
    double prev = 0.0;
    for (double t = -20.0; t <= 4.0; t += 0.05) {
        const double p = mackinnon_p_value(t);
        CHECK(p >= prev - 1e-15);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
    CHECK(mackinnon_p_value(-30.0) == 0.0);
    CHECK(mackinnon_p_value(5.0) == 1.0);
    // Critical values sit at their nominal levels to within the surface's accuracy.
    const auto cv = mackinnon_critical_values(1000);
    CHECK(mackinnon_p_value(cv.five_pct) == doctest::Approx(0.05).epsilon(0.1));
}

TEST_CASE("ACF examples and invariants") {
    const std::vector<double> ramp{1, 2, 3, 4, 5};
    const auto a = acf(ramp, 1);
    CHECK(a.values[0] == 1.0);
    CHECK(a.values[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(a.confidence_band == doctest::Approx(1.96 / std::sqrt(5.0)));

    const auto x = oracle::gaussian(1000, 99);
    const auto noise = acf(x, 20);
    for (std::size_t k = 1; k <= 20; ++k) CHECK(std::abs(noise.values[k]) < 3 * noise.confidence_band);

    auto affine = x;
    for (double& v : affine) v = 3.5 * v - 7.0;
    const auto b = acf(affine, 20);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(std::abs(b.values[k] - noise.values[k]) < 1e-9);

    CHECK_THROWS_AS(acf(ramp, 5), Error);
    try {
        acf(ramp, 5);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidLag);
    }
}

TEST_CASE("PACF matches the regression oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 60 + seed * 7;
        const auto x = seed % 2 ? oracle::ar_process(std::vector<double>{0.5, 0.3}, n, seed) : oracle::random_walk(n, seed);
        const std::size_t lags = std::min<std::size_t>(15, n / 2 - 1);
        const auto dl = pacf(x, lags);
        const auto reg = oracle::pacf_by_regression(x, lags);
        for (std::size_t k = 0; k <= lags; ++k) CHECK(std::abs(dl.values[k] - reg[k]) < 1e-6);
        for (double v : dl.values) CHECK(std::abs(v) <= 1.0 + 1e-9);
    }
}

TEST_CASE("PACF of AR(2) cuts off after lag 2") {
    const auto x = oracle::ar_process(std::vector<double>{0.5, 0.3}, 2000, 2024);
    const auto p = pacf(x, 20);
    CHECK(std::abs(p.values[1]) > p.confidence_band);
    CHECK(std::abs(p.values[2]) > p.confidence_band);
    for (std::size_t k = 3; k <= 20; ++k) CHECK(std::abs(p.values[k]) < p.confidence_band);
    CHECK(suggest_orders(acf(x, 20), p).p == 2);
}

TEST_CASE("PACF pre-conditions") {
    const auto x = oracle::gaussian(20, 1);
    CHECK_THROWS_AS(pacf(x, 10), Error);
    CHECK_NOTHROW(pacf(x, 9));
}

TEST_CASE("bundled series PACF drops sharply after lag 2") {
    const auto s = bundled();
    const auto p = pacf(s, 10);
    CHECK(std::abs(p.values[1]) > p.confidence_band);
    CHECK(std::abs(p.values[2]) > p.confidence_band);
    for (std::size_t k = 3; k <= 10; ++k) CHECK(std::abs(p.values[k]) < p.confidence_band);
    // Reference PACF values from an independent implementation.
    const std::vector<double> ref{1, 0.81172, 0.355087, 0.063831, 0.0529, 0.02384, 0.035784, 0.081225, -0.083693, 0.079266, 0.005953};
    for (std::size_t k = 0; k <= 10; ++k) CHECK(std::abs(p.values[k] - ref[k]) < 1e-5);
}

TEST_CASE("order suggestions") {
    const auto s = bundled();
    const auto o = suggest_orders(acf(s, 26), pacf(s, 26));
    CHECK(o.p == 2);
    CHECK(o.q == 0);

    const auto ar1 = oracle::ar_process(std::vector<double>{0.8}, 2000, 8);
    CHECK(suggest_orders(acf(ar1, 20), pacf(ar1, 20)).p == 1);

    Correlogram flat{CorrelogramKind::Acf, {1, 0.01, -0.02, 0.0, 0.01, 0.0}, 0.1};
    Correlogram flat_p{CorrelogramKind::Pacf, {1, 0.01, -0.02, 0.0, 0.01, 0.0}, 0.1};
    const auto z = suggest_orders(flat, flat_p);
    CHECK(z.p == 0);
    CHECK(z.q == 0);

    Correlogram ma{CorrelogramKind::Acf, {1, 0.5, 0.3, 0.01, 0.02, 0.0, 0.0}, 0.1};
    CHECK(suggest_orders(ma, flat_p).q == 2);
}

}
