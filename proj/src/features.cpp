#include "bugcast/features.hpp"

#include <cmath>

#include "bugcast/error.hpp"
#include "bugcast/io.hpp"

namespace bugcast {

ExogRow ExogRow::from_array(std::span<const double> a) {
    if (a.size() != kColumns) throw Error(ErrorKind::Shape, "covariate row needs 4 columns");
    return {a[0], a[1], a[2], a[3]};
}

ExogRow exogenous_row(Date week_start, const ReleaseCalendar& calendar) {
    ExogRow row;
    row.branch_release = calendar.any_between(week_start, week_start.plus_days(6)) ? 1.0 : 0.0;
    row.week_of_month = static_cast<double>(1 + (week_start.day() - 1) / 7);
    row.month_of_year = static_cast<double>(week_start.month());
    row.year = static_cast<double>(week_start.year());
    return row;
}

ExogenousMatrix::ExogenousMatrix(Date first_week, std::vector<ExogRow> rows)
    : first_week_(first_week), rows_(std::move(rows)) {}

ExogenousMatrix ExogenousMatrix::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > rows_.size()) throw Error(ErrorKind::Alignment, "covariate slice out of range");
    return ExogenousMatrix(week_start(begin), {rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                               rows_.begin() + static_cast<std::ptrdiff_t>(begin + count)});
}

ExogenousMatrix build_exogenous(const WeeklySeries& series, const ReleaseCalendar& calendar) {
    std::vector<ExogRow> rows;
    rows.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) rows.push_back(exogenous_row(series.week_start(i), calendar));
    return ExogenousMatrix(series.first_week(), std::move(rows));
}

ExogenousMatrix build_future_exogenous(Date last_week, std::size_t horizon, const ReleaseCalendar& calendar) {
    std::vector<ExogRow> rows;
    rows.reserve(horizon);
    for (std::size_t h = 1; h <= horizon; ++h) {
        rows.push_back(exogenous_row(last_week.plus_days(7 * static_cast<std::int64_t>(h)), calendar));
    }
    return ExogenousMatrix(last_week.plus_days(7), std::move(rows));
}

std::string format_exogenous_csv(const ExogenousMatrix& exog) {
    std::string out = "week_start,branch_release,week_of_month,month_of_year,year\n";
    for (std::size_t i = 0; i < exog.size(); ++i) {
        const auto& r = exog[i];
        out += exog.week_start(i).to_string() + "," + format_double(r.branch_release) + "," +
               format_double(r.week_of_month) + "," + format_double(r.month_of_year) + "," + format_double(r.year) +
               "\n";
    }
    return out;
}

std::size_t LagMatrix::feature_count() const {
    const bool has_exog = !rows.empty() && rows.front().exog.has_value();
    return lag_count + (has_exog ? ExogRow::kColumns : 0);
}

std::vector<double> LagMatrix::features(std::size_t row) const {
    const auto& r = rows.at(row);
    std::vector<double> out(r.lags);
    if (r.exog) {
        const auto a = r.exog->as_array();
        out.insert(out.end(), a.begin(), a.end());
    }
    return out;
}

LagMatrix build_lag_matrix(std::span<const double> values, std::size_t lag_count, const ExogenousMatrix* exog) {
    if (lag_count == 0) throw Error(ErrorKind::Validation, "lag count must be at least 1");
    if (lag_count >= values.size()) {
        throw InsufficientDataError("lag matrix with " + std::to_string(lag_count) + " lags", lag_count + 1,
                                    values.size());
    }
    if (exog && exog->size() != values.size()) {
        throw Error(ErrorKind::Alignment, "covariates have " + std::to_string(exog->size()) + " rows for " +
                                              std::to_string(values.size()) + " values");
    }
    LagMatrix m;
    m.lag_count = lag_count;
    m.rows.reserve(values.size() - lag_count);
    for (std::size_t t = lag_count; t < values.size(); ++t) {
        LagRow row;
        row.target = values[t];
        row.lags.reserve(lag_count);
        for (std::size_t k = 1; k <= lag_count; ++k) row.lags.push_back(values[t - k]);
        if (exog) row.exog = (*exog)[t];
        m.rows.push_back(std::move(row));
    }
    return m;
}

double clamp_for_log(double count) { return count < 1.0 ? 1.0 : count; }

LogDifference log_difference(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::TransformDomain, "log-difference of an empty series");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) {
            throw Error(ErrorKind::TransformDomain, "log-difference needs positive values; index " +
                                                        std::to_string(i) + " is " + format_double(values[i]));
        }
    }
    LogDifference out;
    out.state.first_value = values[0];
    out.transformed.reserve(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        out.transformed.push_back(std::log(values[i + 1]) - std::log(values[i]));
    }
    return out;
}

std::vector<double> inverse_log_difference(std::span<const double> transformed, const TransformState& state) {
    std::vector<double> out;
    out.reserve(transformed.size() + 1);
    out.push_back(state.first_value);
    double level = std::log(state.first_value);
    for (double d : transformed) {
        level += d;
        out.push_back(std::exp(level));
    }
    return out;
}

}  // namespace bugcast
