#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bugcast/config.hpp"
#include "bugcast/diagnostics.hpp"
#include "bugcast/eval.hpp"
#include "bugcast/features.hpp"
#include "bugcast/ingest.hpp"

namespace bugcast {

struct RunInputs {
    WeeklySeries series;
    std::optional<ReleaseCalendar> calendar;
    std::optional<ExogenousMatrix> exog;
};

/// Loads the series named by the config (CSV, or a fetch when no CSV is given), applies
/// the outlier spec and derives covariates from the release calendar.
RunInputs load_inputs(const RunConfig& config);

/// Covariates for the `horizon` weeks after `last_week`. Throws ErrorKind::Alignment when
/// the calendar is absent or ends before the last forecast week.
ExogenousMatrix future_covariates(const std::optional<ReleaseCalendar>& calendar, Date last_week,
                                  std::size_t horizon);

struct DiagnosticsReport {
    AdfResult adf;
    Correlogram acf;
    Correlogram pacf;
    OrderSuggestion orders;
};

DiagnosticsReport diagnose(const WeeklySeries& series, std::size_t max_lag = 26);
nlohmann::json diagnostics_to_json(const DiagnosticsReport& report);
/// Columns: lag, acf, pacf, band.
std::string correlogram_csv(const DiagnosticsReport& report);

nlohmann::json comparison_to_json(const ComparisonTable& table, const RunConfig& config, const WeeklySeries& series);
/// Columns: week_start, actual, predicted.
std::string trace_csv(const PredictionTrace& trace);
/// Columns: step, cumulative_error_pct.
std::string horizon_csv(const HorizonTrace& trace);
/// Plain-text table of a report produced by comparison_to_json, best values starred.
std::string render_report_table(const nlohmann::json& report);

/// Lower-cased label safe for use in file names.
std::string file_stem(const std::string& label);

}  // namespace bugcast
