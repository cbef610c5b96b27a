#include "bugcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "bugcast/error.hpp"

namespace bugcast {

namespace {

std::span<const ExogRow> covariates_for(const ForecasterSpec& spec, const WeeklySeries& series,
                                        const ExogenousMatrix* exog) {
    if (!spec.use_exogenous) return {};
    if (!exog) throw Error(ErrorKind::Alignment, spec.display_label() + ": exogenous model evaluated without covariates");
    if (exog->size() != series.size() || exog->first_week() != series.first_week()) {
        throw Error(ErrorKind::Alignment, spec.display_label() + ": covariates do not align with the series");
    }
    return exog->rows();
}

std::size_t effective_refit(const ForecasterSpec& spec, const SplitSpec& split) {
    if (spec.refit_interval) return *spec.refit_interval;
    if (spec.family() == Family::Lstm) return 4;
    return std::max<std::size_t>(1, split.refit_interval);
}

}  // namespace

std::pair<std::size_t, std::size_t> resolve_split(const WeeklySeries& series, const SplitSpec& split) {
    const auto train = series.index_of(split.train_end);
    const auto test = series.index_of(split.test_end);
    if (!train) throw Error(ErrorKind::Validation, "train_end " + split.train_end.to_string() + " is not a week in the series");
    if (!test) throw Error(ErrorKind::Validation, "test_end " + split.test_end.to_string() + " is not a week in the series");
    if (*train >= *test) throw Error(ErrorKind::Validation, "train_end must precede test_end");
    if (split.refit_interval == 0) throw Error(ErrorKind::Validation, "refit_interval must be positive");
    return {*train, *test};
}

PredictionTrace rolling_evaluate(const ForecasterSpec& spec, const WeeklySeries& series, const ExogenousMatrix* exog,
                                 const SplitSpec& split) {
    validate(spec);
    const auto [train_end, test_end] = resolve_split(series, split);
    const auto rows = covariates_for(spec, series, exog);
    const auto values = series.values();
    const std::size_t required = minimum_history(spec);
    if (train_end + 1 < required) {
        throw InsufficientDataError(spec.display_label() + " rolling evaluation", required, train_end + 1);
    }
    const std::size_t refit = effective_refit(spec, split);

    PredictionTrace trace;
    trace.model_label = spec.display_label();
    std::optional<FittedModel> model;
    std::size_t since_fit = 0;
    const std::span<const double> all(values);
    for (std::size_t t = train_end + 1; t <= test_end; ++t) {
        if (!model || since_fit >= refit) {
            const auto hist_exog = rows.empty() ? rows : rows.first(t);
            model = fit(spec, all.first(t), hist_exog, model ? &*model : nullptr);
            since_fit = 0;
        }
        const auto target = rows.empty() ? std::span<const ExogRow>{} : rows.subspan(t, 1);
        const double predicted = model->predict(1, target).front();
        trace.rows.push_back({series.week_start(t), values[t], predicted});
        model = model->absorb(values[t], rows.empty() ? std::nullopt : std::optional<ExogRow>(rows[t]));
        ++since_fit;
    }
    return trace;
}

MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty()) throw Error(ErrorKind::Validation, "metrics need a non-empty trace");
    if (actual.size() != predicted.size()) throw Error(ErrorKind::Alignment, "actual and predicted lengths differ");
    const auto n = static_cast<double>(actual.size());

    std::vector<double> err(actual.size()), abs_err(actual.size());
    double sse = 0.0, sum_err = 0.0, sum_abs = 0.0, sum_pct = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        err[i] = actual[i] - predicted[i];
        abs_err[i] = std::abs(err[i]);
        sse += err[i] * err[i];
        sum_err += err[i];
        sum_abs += abs_err[i];
        sum_pct += abs_err[i] / actual[i];
    }
    const double mean_actual = std::accumulate(actual.begin(), actual.end(), 0.0) / n;
    double sst = 0.0;
    for (double a : actual) sst += (a - mean_actual) * (a - mean_actual);
    const double mean_err = sum_err / n;
    double var_err = 0.0;
    for (double e : err) var_err += (e - mean_err) * (e - mean_err);

    std::sort(abs_err.begin(), abs_err.end());
    const std::size_t mid = abs_err.size() / 2;
    const double median = abs_err.size() % 2 ? abs_err[mid] : 0.5 * (abs_err[mid - 1] + abs_err[mid]);

    MetricsReport r;
    r.rmse = std::sqrt(sse / n);
    if (sst > 0.0) {
        r.r_squared = 1.0 - sse / sst;
    } else {
        spdlog::warn("R² is undefined for constant actuals; reporting NaN");
        r.r_squared = std::numeric_limits<double>::quiet_NaN();
    }
    r.error_pct = sum_pct / n;
    r.median_abs_error = median;
    r.error_std = std::sqrt(var_err / n);
    r.mean_abs_error = sum_abs / n;
    return r;
}

MetricsReport compute_metrics(const PredictionTrace& trace) {
    std::vector<double> actual, predicted;
    actual.reserve(trace.rows.size());
    predicted.reserve(trace.rows.size());
    for (const auto& r : trace.rows) {
        actual.push_back(r.actual);
        predicted.push_back(r.predicted);
    }
    return compute_metrics(actual, predicted);
}

HorizonTrace multi_horizon_evaluate(const ForecasterSpec& spec, const WeeklySeries& series,
                                    const ExogenousMatrix* exog, const SplitSpec& split,
                                    const HorizonOptions& options) {
    validate(spec);
    if (options.horizon == 0 || options.stride == 0) {
        throw Error(ErrorKind::Validation, "horizon and stride must be positive");
    }
    const auto [train_end, test_end] = resolve_split(series, split);
    const auto rows = covariates_for(spec, series, exog);
    const auto values = series.values();
    const std::span<const double> all(values);
    const std::size_t required = minimum_history(spec);
    if (train_end + 1 < required) {
        throw InsufficientDataError(spec.display_label() + " horizon evaluation", required, train_end + 1);
    }

    HorizonTrace out;
    out.model_label = spec.display_label();
    std::optional<FittedModel> model;
    std::size_t origin = train_end;
    for (; origin + options.horizon <= test_end; origin += options.stride) {
        const auto hist_exog = rows.empty() ? rows : rows.first(origin + 1);
        model = fit(spec, all.first(origin + 1), hist_exog, model ? &*model : nullptr);
        const auto future = rows.empty() ? rows : rows.subspan(origin + 1, options.horizon);
        HorizonOrigin o;
        o.origin_week = series.week_start(origin);
        o.predicted = model->predict(options.horizon, future);
        o.actual.assign(values.begin() + static_cast<std::ptrdiff_t>(origin + 1),
                        values.begin() + static_cast<std::ptrdiff_t>(origin + 1 + options.horizon));
        out.per_origin.push_back(std::move(o));
    }
    if (origin < test_end) {
        spdlog::warn("{}: {} trailing test weeks do not fit a full {}-week horizon and were skipped", out.model_label,
                     test_end - origin, options.horizon);
    }
    if (out.per_origin.empty()) {
        throw Error(ErrorKind::InsufficientData, out.model_label + ": no forecast origin leaves " +
                                                     std::to_string(options.horizon) + " weeks of actuals");
    }

    out.cumulative_error_pct.assign(options.horizon, 0.0);
    double running = 0.0;
    for (std::size_t k = 0; k < options.horizon; ++k) {
        for (const auto& o : out.per_origin) running += std::abs(o.actual[k] - o.predicted[k]) / o.actual[k];
        out.cumulative_error_pct[k] = running / static_cast<double>(out.per_origin.size() * (k + 1));
    }
    return out;
}

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::Rmse:
            return "rmse";
        case Metric::RSquared:
            return "r_squared";
        case Metric::ErrorPct:
            return "error_pct";
        case Metric::MedianAbsError:
            return "median_abs_error";
        case Metric::ErrorStd:
            return "error_std";
    }
    return "?";
}

double metric_value(const MetricsReport& report, Metric metric) {
    switch (metric) {
        case Metric::Rmse:
            return report.rmse;
        case Metric::RSquared:
            return report.r_squared;
        case Metric::ErrorPct:
            return report.error_pct;
        case Metric::MedianAbsError:
            return report.median_abs_error;
        case Metric::ErrorStd:
            return report.error_std;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

ComparisonTable compare_models(std::span<const ForecasterSpec> specs, const WeeklySeries& series,
                               const ExogenousMatrix* exog, const SplitSpec& split, const CompareOptions& options) {
    if (specs.empty()) throw Error(ErrorKind::Validation, "compare_models needs at least one model spec");
    std::vector<ForecasterSpec> all(specs.begin(), specs.end());
    ForecasterSpec baseline;
    baseline.label = "Base";
    baseline.params = NaiveParams{};
    all.push_back(baseline);

    const auto run = [&](const ForecasterSpec& spec) {
        ComparisonRow row;
        row.label = spec.display_label();
        try {
            auto trace = rolling_evaluate(spec, series, exog, split);
            row.metrics = compute_metrics(trace);
            row.trace = std::move(trace);
            if (options.include_horizon) row.horizon = multi_horizon_evaluate(spec, series, exog, split, options.horizon);
        } catch (const Error& e) {
            row.error = e.what();
            row.metrics.reset();
            spdlog::error("{}: {}", row.label, e.what());
        }
        return row;
    };

    ComparisonTable table;
    if (options.parallel) {
        std::vector<std::future<ComparisonRow>> pending;
        for (const auto& spec : all) pending.push_back(std::async(std::launch::async, run, std::cref(spec)));
        for (auto& f : pending) table.rows.push_back(f.get());
    } else {
        for (const auto& spec : all) table.rows.push_back(run(spec));
    }

    for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
        const bool higher_is_better = kAllMetrics[m] == Metric::RSquared;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (!table.rows[r].metrics) continue;
            const double v = metric_value(*table.rows[r].metrics, kAllMetrics[m]);
            if (std::isnan(v)) continue;
            auto& best = table.best[m];
            if (!best) {
                best = r;
                continue;
            }
            const double b = metric_value(*table.rows[*best].metrics, kAllMetrics[m]);
            if (higher_is_better ? v > b : v < b) best = r;
        }
    }
    return table;
}

}  // namespace bugcast
