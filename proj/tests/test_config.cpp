#include <doctest.h>

#include "bugcast/config.hpp"
#include "bugcast/error.hpp"
#include "bugcast/io.hpp"
#include "bugcast/report.hpp"
#include "support/paths.hpp"

using namespace bugcast;

namespace {

const char* kMinimal = R"({
  "data": {"series_csv": "series.csv", "from": "2015-01-01", "to": "2015-12-31"},
  "split": {"train_end": "2015-06-01", "test_end": "2015-12-28"},
  "models": [{"family": "EXP"}, {"family": "RF", "use_exogenous": true, "params": {"n_trees": 5}}]
})";

ErrorKind kind_of(const std::string& text) {
    try {
        parse_run_config(text, "/base");
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("default profile loads with the published settings") {
    const auto cfg = load_run_config(testpaths::source_dir() / "config" / "mozilla-2010-2019.json");
    CHECK(cfg.profile == "mozilla-2010-2019");
    CHECK(cfg.series_csv->filename() == "mozilla_arrivals.csv");
    CHECK(std::filesystem::exists(*cfg.series_csv));
    CHECK(std::filesystem::exists(*cfg.release_calendar));
    CHECK(std::filesystem::exists(*cfg.outlier_spec));
    CHECK(cfg.split.train_end == Date::parse("2017-01-30"));
    CHECK(cfg.split.test_end == Date::parse("2019-12-30"));
    REQUIRE(cfg.models.size() == 8);
    std::vector<std::string> labels;
    for (const auto& m : cfg.models) labels.push_back(m.display_label());
    CHECK(labels == std::vector<std::string>{"EXP", "WMA", "ARIMA", "ARIMAx", "LSTM", "LSTMx", "RF", "RFx"});
    CHECK(cfg.horizon.horizon == 13);
    CHECK(cfg.seed == 42);
}

TEST_CASE("relative paths resolve against the config directory and seeds are derived") {
    const auto cfg = parse_run_config(kMinimal, "/base/dir");
    CHECK(*cfg.series_csv == std::filesystem::path("/base/dir/series.csv"));
    CHECK_FALSE(cfg.release_calendar.has_value());
    CHECK(cfg.models[0].seed == 42);
    CHECK(cfg.models[1].seed == 43);
    CHECK(cfg.split.refit_interval == 1);
    auto copy = cfg;
    apply_seed(copy, 7);
    CHECK(copy.seed == 7);
    CHECK(copy.models[1].seed == 8);
}

TEST_CASE("invalid configs are rejected") {
    CHECK(kind_of("{") == ErrorKind::Validation);
    CHECK(kind_of(R"({"data": {"from": "2015-01-01", "to": "2015-12-31"}, "models": []})") == ErrorKind::Validation);
    std::string s = kMinimal;
    CHECK(kind_of(std::string(s).replace(s.find("2015-06-01"), 10, "2015-06-02")) == ErrorKind::Validation);
    CHECK(kind_of(std::string(s).replace(s.find("2015-06-01"), 10, "2016-01-04")) == ErrorKind::Validation);
    CHECK(kind_of(std::string(s).replace(s.find("\"EXP\""), 5, "\"GRU\"")) == ErrorKind::Validation);
    CHECK(kind_of(std::string(s).replace(s.find("{\"family\": \"EXP\"}"), 17, "{\"family\": \"EXP\", \"use_exogenous\": true}")) ==
          ErrorKind::Validation);
    CHECK(kind_of(std::string(s).replace(s.find("2015-12-31"), 10, "2014-12-31")) == ErrorKind::Validation);
}

TEST_CASE("future covariates need a calendar that covers the window") {
    const Date last = Date::parse("2019-12-30");
    CHECK_THROWS_AS(future_covariates(std::nullopt, last, 13), Error);
    const ReleaseCalendar short_cal({{"71.0", Date::parse("2019-12-03")}});
    try {
        future_covariates(short_cal, last, 13);
        FAIL("expected an alignment error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Alignment);
    }
    const ReleaseCalendar cal({{"71.0", Date::parse("2019-12-03")}, {"75.0", Date::parse("2020-04-07")}});
    const auto fut = future_covariates(cal, last, 13);
    CHECK(fut.size() == 13);
    CHECK(fut.first_week() == Date::parse("2020-01-06"));
}

TEST_CASE("report rendering") {
    const auto s = load_series_csv(testpaths::data("mozilla_arrivals.csv"));
    auto cfg = parse_run_config(kMinimal, "/base");
    cfg.split = {Date::parse("2019-06-03"), Date::parse("2019-12-30"), 1};
    const std::vector<ForecasterSpec> specs{cfg.models[0]};
    const auto table = compare_models(specs, s, nullptr, cfg.split, {true, {4, 4}, false});
    const auto doc = comparison_to_json(table, cfg, s);
    CHECK(doc["models"].size() == 2);
    CHECK(doc["models"][1]["label"] == "Base");
    CHECK(doc["models"][0]["cumulative_error_pct"].size() == 4);
    CHECK(doc["series"]["weeks"] == 522);
    const auto text = render_report_table(doc);
    CHECK(text.find("EXP") != std::string::npos);
    CHECK(text.find("Base") != std::string::npos);
    CHECK(text.find('*') != std::string::npos);

    CHECK(trace_csv(*table.rows[0].trace).rfind("week_start,actual,predicted\n2019-06-10,", 0) == 0);
    const auto h = horizon_csv(*table.rows[0].horizon);
    CHECK(h.rfind("step,cumulative_error_pct\n1,", 0) == 0);
    CHECK(std::count(h.begin(), h.end(), '\n') == 5);
    CHECK(file_stem("ARIMAx") == "arimax");
}

TEST_CASE("diagnostics report") {
    const auto s = load_series_csv(testpaths::data("mozilla_arrivals.csv"));
    const auto r = diagnose(s, 26);
    const auto doc = diagnostics_to_json(r);
    CHECK(doc["suggested_orders"]["p"] == 2);
    CHECK(doc["suggested_orders"]["q"] == 0);
    CHECK(doc["adf"]["reject_at_5pct"] == true);
    CHECK(doc["acf"].size() == 27);
    const auto csv = correlogram_csv(r);
    CHECK(csv.rfind("lag,acf,pacf,band\n0,1,1,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 28);
}

}
