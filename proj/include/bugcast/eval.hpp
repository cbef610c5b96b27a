#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bugcast/features.hpp"
#include "bugcast/ingest.hpp"
#include "bugcast/models.hpp"

namespace bugcast {

struct SplitSpec {
    Date train_end;  ///< last week of the initial training window
    Date test_end;   ///< last test week
    std::size_t refit_interval = 1;
};

/// Indices of train_end and test_end in `series`; throws ErrorKind::Validation if the
/// dates are not week starts in the series or are out of order.
std::pair<std::size_t, std::size_t> resolve_split(const WeeklySeries& series, const SplitSpec& split);

struct TraceRow {
    Date week_start;
    double actual = 0.0;
    double predicted = 0.0;
};

struct PredictionTrace {
    std::string model_label;
    std::vector<TraceRow> rows;
};

struct MetricsReport {
    double rmse = 0.0;
    double r_squared = 0.0;
    double error_pct = 0.0;
    double median_abs_error = 0.0;
    double error_std = 0.0;
    /// Mean absolute error; reported alongside the median variant.
    double mean_abs_error = 0.0;
};

/// Rolling-origin one-step evaluation. For each test week the model sees every actual
/// before it; it is refitted every `refit_interval` steps and otherwise absorbs the new
/// actual into its history.
PredictionTrace rolling_evaluate(const ForecasterSpec& spec, const WeeklySeries& series,
                                 const ExogenousMatrix* exog, const SplitSpec& split);

/// Throws ErrorKind::Validation on an empty trace. Constant actuals give r_squared = NaN.
MetricsReport compute_metrics(const PredictionTrace& trace);
MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted);

struct HorizonOrigin {
    Date origin_week;  ///< last week of history used for the forecast
    std::vector<double> actual;
    std::vector<double> predicted;
};

struct HorizonTrace {
    std::string model_label;
    std::vector<HorizonOrigin> per_origin;
    /// Entry k: mean |e| / actual over every origin and steps 1..k+1.
    std::vector<double> cumulative_error_pct;
};

struct HorizonOptions {
    std::size_t horizon = 13;
    std::size_t stride = 13;
};

/// Fits at each origin (train_end, train_end + stride, ...) and forecasts `horizon` weeks
/// without feeding back actuals. Origins lacking a full horizon of actuals are dropped.
HorizonTrace multi_horizon_evaluate(const ForecasterSpec& spec, const WeeklySeries& series,
                                    const ExogenousMatrix* exog, const SplitSpec& split,
                                    const HorizonOptions& options = {});

enum class Metric { Rmse, RSquared, ErrorPct, MedianAbsError, ErrorStd };
inline constexpr std::array<Metric, 5> kAllMetrics{Metric::Rmse, Metric::RSquared, Metric::ErrorPct,
                                                   Metric::MedianAbsError, Metric::ErrorStd};
std::string to_string(Metric metric);
double metric_value(const MetricsReport& report, Metric metric);

struct ComparisonRow {
    std::string label;
    std::optional<MetricsReport> metrics;
    std::string error;  ///< set when the model failed
    std::optional<PredictionTrace> trace;
    std::optional<HorizonTrace> horizon;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;  ///< input order, baseline last
    /// Row index of the best value per metric (lowest, except R² which is highest).
    std::array<std::optional<std::size_t>, 5> best;
};

struct CompareOptions {
    bool include_horizon = false;
    HorizonOptions horizon;
    /// Evaluate models concurrently. Results do not depend on this.
    bool parallel = true;
};

/// Evaluates every spec plus a Naive baseline labelled "Base". Failures are reported per
/// row; throws ErrorKind::Validation if `specs` is empty.
ComparisonTable compare_models(std::span<const ForecasterSpec> specs, const WeeklySeries& series,
                               const ExogenousMatrix* exog, const SplitSpec& split,
                               const CompareOptions& options = {});

}  // namespace bugcast
