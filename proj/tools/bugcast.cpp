#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bugcast/config.hpp"
#include "bugcast/error.hpp"
#include "bugcast/eval.hpp"
#include "bugcast/fetch.hpp"
#include "bugcast/io.hpp"
#include "bugcast/models.hpp"
#include "bugcast/report.hpp"

namespace fs = std::filesystem;
using namespace bugcast;

namespace {

struct GlobalOptions {
    std::string config = "config/mozilla-2010-2019.json";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool quiet = false;
};

RunConfig load_config(const GlobalOptions& g) {
    auto cfg = load_run_config(g.config);
    if (g.seed) apply_seed(cfg, *g.seed);
    if (g.out_dir) cfg.out_dir = fs::absolute(*g.out_dir);
    return cfg;
}

void write_output(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, contents);
    spdlog::info("wrote {}", path.string());
}

struct FetchArgs {
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::optional<std::string> which;
    std::optional<std::string> endpoint;
    std::optional<std::string> output;
};

int cmd_fetch(const GlobalOptions& g, const FetchArgs& a) {
    std::optional<RunConfig> cfg;
    if (fs::exists(g.config)) cfg = load_config(g);
    const Date from = a.from ? Date::parse(*a.from) : cfg ? cfg->fetch_from : throw Error(ErrorKind::Validation, "--from is required without a config file");
    const Date to = a.to ? Date::parse(*a.to) : cfg ? cfg->fetch_to : throw Error(ErrorKind::Validation, "--to is required without a config file");
    if (to < from) throw Error(ErrorKind::InvalidRange, "--to precedes --from");
    const SeriesLabel which = a.which ? parse_series_label(*a.which) : cfg ? cfg->which : SeriesLabel::Arrival;
    const fs::path out_dir = g.out_dir ? fs::path(*g.out_dir) : cfg ? cfg->out_dir : fs::path("out");

    FetchOptions options;
    if (cfg) options.endpoint = cfg->endpoint;
    options.cache_dir = out_dir / "cache";
    options = fetch_options_from_env(options);
    if (a.endpoint) options.endpoint = *a.endpoint;

    FetchStats stats;
    const auto records = fetch_bug_counts(from, to.plus_days(1), options, default_http_get(), &stats);
    const auto series = aggregate_weekly(records, from, to, which);
    const fs::path output = a.output ? fs::path(*a.output) : out_dir / "series.csv";
    write_output(output, format_series_csv(series));
    const nlohmann::json log{{"endpoint", options.endpoint},
                             {"from", from.to_string()},
                             {"to", to.to_string()},
                             {"which", to_string(which)},
                             {"records", records.size()},
                             {"weeks", series.size()},
                             {"cache_hit", stats.cache_hit},
                             {"requests", stats.requests},
                             {"pages", stats.pages}};
    write_output(output.parent_path() / "fetch_log.json", log.dump(2) + "\n");
    if (stats.cache_hit) spdlog::info("cache hit, no requests made");
    return 0;
}

struct DiagnoseArgs {
    std::optional<std::string> series;
    std::size_t max_lag = 26;
};

int cmd_diagnose(const GlobalOptions& g, const DiagnoseArgs& a) {
    std::optional<WeeklySeries> series;
    fs::path out_dir = g.out_dir ? fs::path(*g.out_dir) : fs::path("out");
    if (a.series) {
        series = load_series_csv(*a.series);
    } else {
        const auto cfg = load_config(g);
        series = load_inputs(cfg).series;
        out_dir = cfg.out_dir;
    }
    const auto report = diagnose(*series, a.max_lag);
    write_output(out_dir / "diagnostics.json", diagnostics_to_json(report).dump(2) + "\n");
    write_output(out_dir / "correlogram.csv", correlogram_csv(report));
    std::cout << fmt::format("ADF statistic {:.4f}, p-value {:.4f}, lag {}; suggested (p, q) = ({}, {})\n",
                             report.adf.statistic, report.adf.p_value, report.adf.chosen_lag, report.orders.p,
                             report.orders.q);
    return 0;
}

struct EvaluateArgs {
    bool dump_features = false;
    bool no_horizon = false;
    std::vector<std::string> only;
};

int cmd_evaluate(const GlobalOptions& g, const EvaluateArgs& a) {
    auto cfg = load_config(g);
    if (!a.only.empty()) {
        std::vector<ForecasterSpec> kept;
        for (const auto& m : cfg.models) {
            if (std::find(a.only.begin(), a.only.end(), m.display_label()) != a.only.end()) kept.push_back(m);
        }
        if (kept.empty()) throw Error(ErrorKind::Validation, "--model matched none of the configured models");
        cfg.models = std::move(kept);
    }
    const auto inputs = load_inputs(cfg);
    const ExogenousMatrix* exog = inputs.exog ? &*inputs.exog : nullptr;
    resolve_split(inputs.series, cfg.split);

    CompareOptions options;
    options.include_horizon = !a.no_horizon;
    options.horizon = cfg.horizon;
    const auto table = compare_models(cfg.models, inputs.series, exog, cfg.split, options);

    const auto report = comparison_to_json(table, cfg, inputs.series);
    write_output(cfg.out_dir / "report.json", report.dump(2) + "\n");
    for (const auto& row : table.rows) {
        if (row.trace) write_output(cfg.out_dir / ("trace_" + file_stem(row.label) + ".csv"), trace_csv(*row.trace));
        if (row.horizon) {
            write_output(cfg.out_dir / ("horizon_" + file_stem(row.label) + ".csv"), horizon_csv(*row.horizon));
        }
    }
    if (a.dump_features && exog) write_output(cfg.out_dir / "features.csv", format_exogenous_csv(*exog));
    std::cout << render_report_table(report);

    for (const auto& row : table.rows) {
        if (!row.metrics) return 1;
    }
    return 0;
}

struct ForecastArgs {
    std::size_t horizon = 13;
    std::optional<std::string> model;
    std::optional<std::string> model_file;
    std::optional<std::string> save_model;
    std::optional<std::string> output;
};

int cmd_forecast(const GlobalOptions& g, const ForecastArgs& a) {
    if (a.horizon == 0) throw Error(ErrorKind::Validation, "--horizon must be positive");
    const auto cfg = load_config(g);
    const auto inputs = load_inputs(cfg);

    std::optional<FittedModel> model;
    if (a.model_file) {
        model = model_from_json(read_file(*a.model_file));
    } else {
        std::optional<ForecasterSpec> spec;
        if (!a.model) {
            spec = cfg.models.front();
        } else if (*a.model == "Base" || *a.model == "Naive") {
            spec = ForecasterSpec{"Base", NaiveParams{}, false, cfg.seed, std::nullopt};
        } else {
            for (const auto& m : cfg.models) {
                if (m.display_label() == *a.model) spec = m;
            }
        }
        if (!spec) throw Error(ErrorKind::Validation, "no configured model is labelled '" + a.model.value_or("") + "'");
        const ExogenousMatrix* exog = inputs.exog ? &*inputs.exog : nullptr;
        if (spec->use_exogenous && !exog) {
            throw Error(ErrorKind::Alignment, spec->display_label() + " needs a release calendar for covariates");
        }
        model = fit(*spec, inputs.series, spec->use_exogenous ? exog : nullptr);
    }
    if (a.save_model) write_output(*a.save_model, model_to_json(*model));

    const Date last = inputs.series.last_week();
    std::optional<ExogenousMatrix> future;
    if (model->spec().use_exogenous) future = future_covariates(inputs.calendar, last, a.horizon);
    const auto predicted = model->predict(a.horizon, future ? future->rows() : std::span<const ExogRow>{});

    std::string csv = "week_start,predicted\n";
    for (std::size_t h = 0; h < predicted.size(); ++h) {
        csv += last.plus_days(7 * static_cast<std::int64_t>(h + 1)).to_string() + "," + format_double(predicted[h]) + "\n";
    }
    const fs::path output =
        a.output ? fs::path(*a.output) : cfg.out_dir / ("forecast_" + file_stem(model->spec().display_label()) + ".csv");
    write_output(output, csv);
    std::cout << csv;
    return 0;
}

int cmd_report(const GlobalOptions& g, const std::optional<std::string>& input) {
    fs::path path;
    if (input) {
        path = *input;
    } else {
        path = (g.out_dir ? fs::path(*g.out_dir) : load_config(g).out_dir) / "report.json";
    }
    nlohmann::json report;
    try {
        report = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed report " + path.string(), e.what());
    }
    std::cout << "profile " << report.value("profile", std::string()) << ", seed " << report.value("seed", 0) << "\n";
    std::cout << render_report_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("bugcast"));
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Weekly bug count forecasting"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config, "Run configuration file")->capture_default_str();
    app.add_option("--seed", g.seed, "Override the random seed of every model");
    app.add_option("--out-dir", g.out_dir, "Output directory");
    app.add_flag("-q,--quiet", g.quiet, "Only log warnings and errors");

    FetchArgs fa;
    auto* fetch = app.add_subcommand("fetch", "Download bug records and write a weekly series CSV");
    fetch->add_option("--from", fa.from, "First day (YYYY-MM-DD)");
    fetch->add_option("--to", fa.to, "Last day, inclusive (YYYY-MM-DD)");
    fetch->add_option("--which", fa.which, "arrival or resolved");
    fetch->add_option("--endpoint", fa.endpoint, "Tracker base URL");
    fetch->add_option("-o,--output", fa.output, "Output CSV path");

    DiagnoseArgs da;
    auto* diag = app.add_subcommand("diagnose", "Stationarity test and correlograms");
    diag->add_option("--series", da.series, "Series CSV (defaults to the configured data)");
    diag->add_option("--max-lag", da.max_lag, "Largest correlogram lag")->capture_default_str();

    EvaluateArgs ea;
    auto* eval = app.add_subcommand("evaluate", "Rolling evaluation of every configured model");
    eval->add_flag("--dump-features", ea.dump_features, "Also write the covariate matrix");
    eval->add_flag("--no-horizon", ea.no_horizon, "Skip the multi-step evaluation");
    eval->add_option("--model", ea.only, "Restrict to these model labels");

    ForecastArgs fo;
    auto* forecast = app.add_subcommand("forecast", "Forecast the weeks after the series");
    forecast->add_option("--horizon", fo.horizon, "Weeks to forecast")->capture_default_str();
    forecast->add_option("--model", fo.model, "Configured model label, or Base");
    forecast->add_option("--model-file", fo.model_file, "Previously saved model JSON");
    forecast->add_option("--save-model", fo.save_model, "Write the fitted model JSON here");
    forecast->add_option("-o,--output", fo.output, "Output CSV path");

    std::optional<std::string> report_input;
    auto* report = app.add_subcommand("report", "Print the metrics table of an evaluation");
    report->add_option("--input", report_input, "report.json path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }
    if (g.quiet) spdlog::set_level(spdlog::level::warn);

    try {
        if (*fetch) return cmd_fetch(g, fa);
        if (*diag) return cmd_diagnose(g, da);
        if (*eval) return cmd_evaluate(g, ea);
        if (*forecast) return cmd_forecast(g, fo);
        if (*report) return cmd_report(g, report_input);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("internal error: {}", e.what());
        return 1;
    }
    return 1;
}
