#include "bugcast/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bugcast/error.hpp"
#include "bugcast/fetch.hpp"
#include "bugcast/io.hpp"

namespace bugcast {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_to_json(const MetricsReport& m) {
    return {{"rmse", number_or_null(m.rmse)},
            {"r_squared", number_or_null(m.r_squared)},
            {"error_pct", number_or_null(m.error_pct)},
            {"median_abs_error", number_or_null(m.median_abs_error)},
            {"error_std", number_or_null(m.error_std)},
            {"mean_abs_error", number_or_null(m.mean_abs_error)}};
}

}  // namespace

RunInputs load_inputs(const RunConfig& config) {
    std::optional<WeeklySeries> series;
    if (config.series_csv) {
        series = load_series_csv(*config.series_csv, config.which);
    } else {
        auto options = fetch_options_from_env();
        options.endpoint = config.endpoint;
        const auto records = fetch_bug_counts(config.fetch_from, config.fetch_to.plus_days(1), options);
        series = aggregate_weekly(records, config.fetch_from, config.fetch_to, config.which);
    }
    if (config.outlier_spec) series = remove_outliers(*series, load_outlier_spec(*config.outlier_spec));

    RunInputs inputs{std::move(*series), std::nullopt, std::nullopt};
    if (config.release_calendar) {
        inputs.calendar = load_release_calendar(*config.release_calendar);
        inputs.exog = build_exogenous(inputs.series, *inputs.calendar);
    }
    return inputs;
}

ExogenousMatrix future_covariates(const std::optional<ReleaseCalendar>& calendar, Date last_week,
                                  std::size_t horizon) {
    if (!calendar || calendar->empty()) {
        throw Error(ErrorKind::Alignment, "future covariate rows are missing: no release calendar configured");
    }
    const Date final_week = last_week.plus_days(7 * static_cast<std::int64_t>(horizon));
    if (calendar->releases().back().date < final_week) {
        throw Error(ErrorKind::Alignment, "future covariate rows are missing: release calendar ends at " +
                                              calendar->releases().back().date.to_string() + ", before week " +
                                              final_week.to_string());
    }
    return build_future_exogenous(last_week, horizon, *calendar);
}

DiagnosticsReport diagnose(const WeeklySeries& series, std::size_t max_lag) {
    DiagnosticsReport report;
    report.adf = adf_test(series);
    const std::size_t lags = std::min(max_lag, series.size() - 1);
    report.acf = acf(series, lags);
    report.pacf = pacf(series, lags);
    report.orders = suggest_orders(report.acf, report.pacf);
    return report;
}

json diagnostics_to_json(const DiagnosticsReport& r) {
    const auto& cv = r.adf.critical_values;
    return {{"adf",
             {{"statistic", r.adf.statistic},
              {"p_value", r.adf.p_value},
              {"chosen_lag", r.adf.chosen_lag},
              {"n_obs_used", r.adf.n_obs_used},
              {"critical_values", {{"1%", cv.one_pct}, {"5%", cv.five_pct}, {"10%", cv.ten_pct}}},
              {"reject_at_5pct", r.adf.reject_at_5pct}}},
            {"acf", r.acf.values},
            {"pacf", r.pacf.values},
            {"confidence_band", r.acf.confidence_band},
            {"suggested_orders", {{"p", r.orders.p}, {"q", r.orders.q}}}};
}

std::string correlogram_csv(const DiagnosticsReport& r) {
    std::string out = "lag,acf,pacf,band\n";
    for (std::size_t k = 0; k < r.acf.values.size(); ++k) {
        out += fmt::format("{},{},{},{}\n", k, format_double(r.acf.values[k]), format_double(r.pacf.values[k]),
                           format_double(r.acf.confidence_band));
    }
    return out;
}

json comparison_to_json(const ComparisonTable& table, const RunConfig& config, const WeeklySeries& series) {
    json models = json::array();
    for (const auto& row : table.rows) {
        json m{{"label", row.label}};
        if (row.metrics) {
            m["metrics"] = metrics_to_json(*row.metrics);
        } else {
            m["error"] = row.error;
        }
        if (row.trace) m["test_weeks"] = row.trace->rows.size();
        if (row.horizon) {
            json cum = json::array();
            for (double v : row.horizon->cumulative_error_pct) cum.push_back(number_or_null(v));
            m["cumulative_error_pct"] = cum;
            m["horizon_origins"] = row.horizon->per_origin.size();
        }
        models.push_back(std::move(m));
    }
    json best = json::object();
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
        best[to_string(kAllMetrics[i])] = table.best[i] ? json(table.rows[*table.best[i]].label) : json(nullptr);
    }
    return {{"profile", config.profile},
            {"seed", config.seed},
            {"series",
             {{"label", to_string(series.label())},
              {"first_week", series.first_week().to_string()},
              {"last_week", series.last_week().to_string()},
              {"weeks", series.size()}}},
            {"split",
             {{"train_end", config.split.train_end.to_string()},
              {"test_end", config.split.test_end.to_string()},
              {"refit_interval", config.split.refit_interval}}},
            {"horizon", {{"steps", config.horizon.horizon}, {"stride", config.horizon.stride}}},
            {"models", std::move(models)},
            {"best", std::move(best)}};
}

std::string trace_csv(const PredictionTrace& trace) {
    std::string out = "week_start,actual,predicted\n";
    for (const auto& r : trace.rows) {
        out += r.week_start.to_string() + "," + format_double(r.actual) + "," + format_double(r.predicted) + "\n";
    }
    return out;
}

std::string horizon_csv(const HorizonTrace& trace) {
    std::string out = "step,cumulative_error_pct\n";
    for (std::size_t h = 0; h < trace.cumulative_error_pct.size(); ++h) {
        out += std::to_string(h + 1) + "," + format_double(trace.cumulative_error_pct[h]) + "\n";
    }
    return out;
}

std::string render_report_table(const json& report) {
    static constexpr const char* kKeys[] = {"rmse", "r_squared", "error_pct", "median_abs_error", "error_std"};
    static constexpr const char* kHeads[] = {"RMSE", "R2", "Error%", "MedAE", "Std"};
    const auto& best = report.at("best");
    std::string out = fmt::format("{:<8}", "Model");
    for (const char* h : kHeads) out += fmt::format("{:>12}", h);
    out += "\n";
    for (const auto& m : report.at("models")) {
        const auto label = m.at("label").get<std::string>();
        out += fmt::format("{:<8}", label);
        if (!m.contains("metrics")) {
            out += "  failed: " + m.value("error", std::string()) + "\n";
            continue;
        }
        for (const char* key : kKeys) {
            const auto& v = m["metrics"][key];
            const bool is_best = best.contains(key) && best[key] == label;
            const std::string cell = v.is_null() ? "n/a" : fmt::format("{:.3f}", v.get<double>());
            out += fmt::format("{:>12}", cell + (is_best ? "*" : " "));
        }
        out += "\n";
    }
    return out;
}

std::string file_stem(const std::string& label) {
    std::string out;
    for (char c : label) {
        out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_';
    }
    return out;
}

}  // namespace bugcast
