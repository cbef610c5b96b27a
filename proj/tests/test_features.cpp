#include <doctest.h>

#include <cmath>
#include <random>

#include "bugcast/error.hpp"
#include "bugcast/features.hpp"

using namespace bugcast;

TEST_SUITE("features") {

TEST_CASE("exogenous rows") {
    const ReleaseCalendar cal({{"52.0", Date::parse("2017-03-07")}, {"51.0", Date::parse("2017-01-24")}});
    CHECK(exogenous_row(Date::parse("2017-03-13"), cal) == ExogRow{0, 2, 3, 2017});
    CHECK(exogenous_row(Date::parse("2017-03-06"), {}) == ExogRow{0, 1, 3, 2017});
    CHECK(exogenous_row(Date::parse("2017-03-06"), cal).branch_release == 1.0);
    CHECK(exogenous_row(Date::parse("2017-01-23"), cal).branch_release == 1.0);
    CHECK(exogenous_row(Date::parse("2017-01-16"), cal).branch_release == 0.0);
    CHECK(exogenous_row(Date::parse("2017-01-30"), cal).week_of_month == 5.0);
    // A release on the Sunday closing the week still counts.
    const ReleaseCalendar sunday({{"x", Date::parse("2017-03-12")}});
    CHECK(exogenous_row(Date::parse("2017-03-06"), sunday).branch_release == 1.0);
    CHECK(exogenous_row(Date::parse("2017-03-13"), sunday).branch_release == 0.0);
}

TEST_CASE("exogenous matrix aligns with the series and ignores calendar order") {
    const WeeklySeries s(Date::parse("2016-12-26"), std::vector<std::int64_t>(10, 5));
    std::vector<Release> rel{{"a", Date::parse("2017-01-24")}, {"b", Date::parse("2016-12-27")}, {"c", Date::parse("2017-02-20")}};
    const auto m1 = build_exogenous(s, ReleaseCalendar(rel));
    std::reverse(rel.begin(), rel.end());
    const auto m2 = build_exogenous(s, ReleaseCalendar(rel));
    CHECK(m1 == m2);
    CHECK(m1.size() == s.size());
    CHECK(m1.first_week() == s.first_week());
    CHECK(m1[0].branch_release == 1.0);
    CHECK(m1[0].year == 2016.0);
    CHECK(m1[1].year == 2017.0);
    CHECK(build_exogenous(s, {})[0].branch_release == 0.0);
    const auto fut = build_future_exogenous(s.last_week(), 3, ReleaseCalendar(rel));
    CHECK(fut.size() == 3);
    CHECK(fut.first_week() == s.last_week().plus_days(7));
    CHECK(format_exogenous_csv(m1).rfind("week_start,branch_release,week_of_month,month_of_year,year\n2016-12-26,1,4,12,2016\n", 0) == 0);
}

TEST_CASE("lag matrix") {
    const std::vector<double> v{1, 2, 3, 4};
    const auto m = build_lag_matrix(v, 2);
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].target == 3);
    CHECK(m.rows[0].lags == std::vector<double>{2, 1});
    CHECK(m.rows[1].target == 4);
    CHECK(m.rows[1].lags == std::vector<double>{3, 2});
    CHECK(build_lag_matrix(v, 3).rows.size() == 1);
    CHECK_THROWS_AS(build_lag_matrix(v, 4), InsufficientDataError);
    CHECK_THROWS_AS(build_lag_matrix(v, 0), Error);

    const auto c = build_lag_matrix(std::vector<double>(5, 5.0), 2);
    for (const auto& r : c.rows) {
        CHECK(r.target == 5);
        CHECK(r.lags == std::vector<double>{5, 5});
    }

    for (std::size_t n = 2; n < 30; ++n) {
        for (std::size_t L = 1; L < n; ++L) CHECK(build_lag_matrix(std::vector<double>(n, 1.0), L).rows.size() == n - L);
    }
}

TEST_CASE("lag matrix rows carry the target week's covariates") {
    const WeeklySeries s(Date::parse("2017-01-02"), {1, 2, 3, 4, 5, 6});
    const ReleaseCalendar cal({{"r", Date::parse("2017-01-25")}});
    const auto exog = build_exogenous(s, cal);
    const auto values = s.values();
    const auto m = build_lag_matrix(values, 2, &exog);
    REQUIRE(m.rows.size() == 4);
    CHECK(m.rows[1].target == 4);
    CHECK(*m.rows[1].exog == exog[3]);
    CHECK(m.rows[1].exog->branch_release == 1.0);
    CHECK(m.feature_count() == 2 + ExogRow::kColumns);
    CHECK(m.features(1) == std::vector<double>{3, 2, 1, 4, 1, 2017});

    const ExogenousMatrix short_exog(s.first_week(), {exog[0], exog[1]});
    CHECK_THROWS_AS(build_lag_matrix(values, 2, &short_exog), Error);
}

TEST_CASE("log difference") {
    const std::vector<double> powers{1, std::exp(1.0), std::exp(2.0)};
    const auto t = log_difference(powers);
    REQUIRE(t.transformed.size() == 2);
    CHECK(t.transformed[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.transformed[1] == doctest::Approx(1.0).epsilon(1e-15));

    const std::vector<double> v{50, 120, 558};
    const auto f = log_difference(v);
    const auto back = inverse_log_difference(f.transformed, f.state);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(back[i] - v[i]) < 1e-9);

    const auto c = log_difference(std::vector<double>{7, 7, 7});
    CHECK(c.transformed == std::vector<double>{0, 0});

    try {
        log_difference(std::vector<double>{3, 0, 2});
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TransformDomain);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
    CHECK(clamp_for_log(0.0) == 1.0);
    CHECK(clamp_for_log(-4.0) == 1.0);
    CHECK(clamp_for_log(50.0) == 50.0);
}

TEST_CASE("log difference round-trips random positive series") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.5, 1000.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(2 + rng() % 200);
        for (double& x : v) x = u(rng);
        const auto f = log_difference(v);
        const auto back = inverse_log_difference(f.transformed, f.state);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(back[i] - v[i]) <= 1e-9);
    }
}

}
