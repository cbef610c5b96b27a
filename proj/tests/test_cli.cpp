#include <doctest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include <json.hpp>

#include "bugcast/io.hpp"
#include "support/mock_tracker.hpp"
#include "support/paths.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(BUGCAST_CLI) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

/// Writes a config that points at the bundled data with absolute paths.
fs::path write_config(const testpaths::TempDir& dir, const nlohmann::json& models, bool calendar = true,
                      const std::string& train_end = "2018-12-31") {
    nlohmann::json cfg{{"profile", "test"},
                       {"data", {{"series_csv", testpaths::data("mozilla_arrivals.csv").string()}, {"from", "2010-01-01"}, {"to", "2019-12-31"}}},
                       {"outliers", testpaths::data("outliers_arrivals.json").string()},
                       {"split", {{"train_end", train_end}, {"test_end", "2019-12-30"}}},
                       {"horizon", {{"steps", 13}, {"stride", 13}}},
                       {"seed", 5},
                       {"models", models},
                       {"out_dir", (dir / "out").string()}};
    if (calendar) cfg["release_calendar"] = testpaths::data("mozilla_releases.csv").string();
    const auto path = dir / "config.json";
    bugcast::write_file_atomic(path, cfg.dump(2));
    return path;
}

std::vector<std::string> csv_lines(const fs::path& p) {
    const auto text = bugcast::read_file(p);
    std::vector<std::string> out;
    for (auto line : bugcast::split_lines(text)) out.emplace_back(line);
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("diagnose the bundled series") {
    testpaths::TempDir dir("diag");
    const auto r = run("--config " + quoted(testpaths::source_dir() / "config" / "mozilla-2010-2019.json") + " --out-dir " +
                       quoted(dir.path()) + " diagnose");
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(bugcast::read_file(dir / "diagnostics.json"));
    CHECK(std::abs(doc["adf"]["p_value"].get<double>() - 0.012) <= 0.01);
    CHECK(doc["suggested_orders"]["p"] == 2);
    CHECK(doc["suggested_orders"]["q"] == 0);
    CHECK(csv_lines(dir / "correlogram.csv").front() == "lag,acf,pacf,band");
}

TEST_CASE("diagnose white noise and a too-short series") {
    testpaths::TempDir dir("diag2");
    std::string csv = "week_start,count\n";
    std::istringstream noise(bugcast::read_file(testpaths::fixture("white_noise_500.txt")));
    bugcast::Date week = bugcast::Date::parse("2010-01-04");
    for (double v; noise >> v; week = week.plus_days(7)) csv += week.to_string() + "," + std::to_string(std::lround(200 + 20 * v)) + "\n";
    bugcast::write_file_atomic(dir / "noise.csv", csv);
    auto r = run("--out-dir " + quoted(dir / "n") + " diagnose --series " + quoted(dir / "noise.csv"));
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(bugcast::read_file(dir / "n" / "diagnostics.json"))["adf"]["reject_at_5pct"] == true);

    bugcast::write_file_atomic(dir / "short.csv",
                               "week_start,count\n2015-01-05,3\n2015-01-12,4\n2015-01-19,8\n2015-01-26,2\n2015-02-02,5\n");
    r = run("--out-dir " + quoted(dir / "s") + " diagnose --series " + quoted(dir / "short.csv"));
    CHECK(r.code == 3);
    CHECK(r.output.find("need at least") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "s" / "diagnostics.json"));
}

TEST_CASE("evaluate a single model") {
    testpaths::TempDir dir("eval");
    const auto cfg = write_config(dir, nlohmann::json::array({{{"family", "EXP"}}}));
    const auto r = run("--config " + quoted(cfg) + " evaluate --dump-features");
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(bugcast::read_file(dir / "out" / "report.json"));
    REQUIRE(report["models"].size() == 2);
    CHECK(report["models"][0]["label"] == "EXP");
    CHECK(report["models"][1]["label"] == "Base");
    CHECK(csv_lines(dir / "out" / "trace_exp.csv").size() == 53);
    CHECK(csv_lines(dir / "out" / "horizon_base.csv").size() == 14);
    CHECK(fs::exists(dir / "out" / "features.csv"));

    const auto rep = run("--out-dir " + quoted(dir / "out") + " report");
    CHECK(rep.code == 0);
    CHECK(rep.output.find("Base") != std::string::npos);
}

TEST_CASE("evaluate is byte-reproducible") {
    testpaths::TempDir dir("det");
    const auto models = nlohmann::json::array(
        {{{"family", "RF"}, {"use_exogenous", true}, {"params", {{"n_trees", 30}}}},
         {{"family", "LSTM"}, {"params", {{"units", 6}, {"epochs", 3}, {"warm_epochs", 1}}}},
         {{"family", "ARIMA"}}});
    const auto cfg = write_config(dir, models);
    REQUIRE(run("--config " + quoted(cfg) + " --out-dir " + quoted(dir / "a") + " evaluate").code == 0);
    REQUIRE(run("--config " + quoted(cfg) + " --out-dir " + quoted(dir / "b") + " evaluate").code == 0);
    CHECK(bugcast::read_file(dir / "a" / "report.json") == bugcast::read_file(dir / "b" / "report.json"));
    CHECK(bugcast::read_file(dir / "a" / "trace_rfx.csv") == bugcast::read_file(dir / "b" / "trace_rfx.csv"));
    REQUIRE(run("--config " + quoted(cfg) + " --seed 9 --out-dir " + quoted(dir / "c") + " evaluate").code == 0);
    CHECK(bugcast::read_file(dir / "a" / "trace_rfx.csv") != bugcast::read_file(dir / "c" / "trace_rfx.csv"));
}

TEST_CASE("forecast") {
    testpaths::TempDir dir("fc");
    const auto models = nlohmann::json::array({{{"family", "RF"}, {"use_exogenous", true}, {"params", {{"n_trees", 20}}}},
                                               {{"family", "ARIMA"}, {"use_exogenous", true}}});
    const auto cfg = write_config(dir, models);

    auto r = run("--config " + quoted(cfg) + " forecast --model Base --horizon 13 -o " + quoted(dir / "naive.csv"));
    REQUIRE(r.code == 0);
    auto lines = csv_lines(dir / "naive.csv");
    REQUIRE(lines.size() == 14);
    CHECK(lines[0] == "week_start,predicted");
    CHECK(lines[1].rfind("2020-01-06,", 0) == 0);
    for (std::size_t i = 2; i < lines.size(); ++i) CHECK(lines[i].substr(11) == lines[1].substr(11));

    r = run("--config " + quoted(cfg) + " forecast --model RFx --save-model " + quoted(dir / "rfx.json") + " -o " +
            quoted(dir / "rfx.csv"));
    REQUIRE(r.code == 0);
    lines = csv_lines(dir / "rfx.csv");
    REQUIRE(lines.size() == 14);
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::stod(lines[i].substr(11)) >= 0.0);

    r = run("--config " + quoted(cfg) + " forecast --model-file " + quoted(dir / "rfx.json") + " -o " + quoted(dir / "rfx2.csv"));
    REQUIRE(r.code == 0);
    CHECK(bugcast::read_file(dir / "rfx.csv") == bugcast::read_file(dir / "rfx2.csv"));

    r = run("--config " + quoted(cfg) + " forecast --model ARIMAx --horizon 30");
    CHECK(r.code == 3);
    CHECK(r.output.find("covariate") != std::string::npos);

    testpaths::TempDir bare("fc2");
    const auto no_cal = write_config(bare, models, false);
    CHECK(run("--config " + quoted(no_cal) + " forecast --model ARIMAx").code == 3);
    CHECK(run("--config " + quoted(no_cal) + " forecast --model GRU").code == 3);
}

TEST_CASE("fetch writes a series and reuses its cache") {
    testsupport::MockTracker tracker(300);
    testpaths::TempDir dir("fetch");
    const std::string base = "--config " + quoted(dir / "none.json") + " --out-dir " + quoted(dir.path()) +
                             " fetch --from 2015-01-05 --to 2015-05-03 --endpoint " + tracker.endpoint();
    auto r = run(base);
    REQUIRE(r.code == 0);
    const auto first = bugcast::read_file(dir / "series.csv");
    CHECK(csv_lines(dir / "series.csv").size() == 18);
    const int requests = tracker.requests;
    r = run(base);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("cache hit") != std::string::npos);
    CHECK(tracker.requests == requests);
    CHECK(bugcast::read_file(dir / "series.csv") == first);
    const auto log = nlohmann::json::parse(bugcast::read_file(dir / "fetch_log.json"));
    CHECK(log["cache_hit"] == true);
    CHECK(log["records"] == 288);
}

TEST_CASE("fetch from an unreachable host exits with 2") {
    testpaths::TempDir dir("unreach");
    const auto r = run("--config " + quoted(dir / "none.json") + " --out-dir " + quoted(dir.path()) +
                       " fetch --from 2015-01-05 --to 2015-02-01 --endpoint http://127.0.0.1:9");
    CHECK(r.code == 2);
    CHECK_FALSE(r.output.empty());
    CHECK_FALSE(fs::exists(dir / "series.csv"));
}

TEST_CASE("invalid configuration has no side effects") {
    testpaths::TempDir dir("badcfg");
    bugcast::write_file_atomic(dir / "bad.json",
                               R"({"data":{"series_csv":"x.csv","from":"2015-01-01","to":"2015-12-31"},
                                   "split":{"train_end":"2015-06-02","test_end":"2015-12-28"},
                                   "models":[{"family":"EXP"}],"out_dir":")" + (dir / "out").string() + "\"}");
    const auto r = run("--config " + quoted(dir / "bad.json") + " evaluate");
    CHECK(r.code == 3);
    CHECK_FALSE(fs::exists(dir / "out"));
    CHECK(run("--config " + quoted(dir / "missing.json") + " evaluate").code == 2);
    CHECK(run("no-such-command").code == 3);
    CHECK(run("--help").code == 0);
}

}
