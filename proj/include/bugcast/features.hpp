#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bugcast/ingest.hpp"

namespace bugcast {

/// Covariates describing one week: release indicator and calendar position.
struct ExogRow {
    double branch_release = 0.0;
    double week_of_month = 1.0;
    double month_of_year = 1.0;
    double year = 0.0;

    static constexpr std::size_t kColumns = 4;

    [[nodiscard]] std::array<double, kColumns> as_array() const {
        return {branch_release, week_of_month, month_of_year, year};
    }
    static ExogRow from_array(std::span<const double> a);

    friend bool operator==(const ExogRow&, const ExogRow&) = default;
};

/// Computes the covariates of the week starting on `week_start`.
ExogRow exogenous_row(Date week_start, const ReleaseCalendar& calendar);

class ExogenousMatrix {
public:
    ExogenousMatrix() = default;
    ExogenousMatrix(Date first_week, std::vector<ExogRow> rows);

    [[nodiscard]] std::size_t size() const { return rows_.size(); }
    [[nodiscard]] bool empty() const { return rows_.empty(); }
    [[nodiscard]] Date first_week() const { return first_week_; }
    [[nodiscard]] Date week_start(std::size_t i) const {
        return first_week_.plus_days(7 * static_cast<std::int64_t>(i));
    }
    [[nodiscard]] std::span<const ExogRow> rows() const { return rows_; }
    [[nodiscard]] const ExogRow& operator[](std::size_t i) const { return rows_[i]; }

    /// Rows [begin, begin + count).
    [[nodiscard]] ExogenousMatrix slice(std::size_t begin, std::size_t count) const;

    friend bool operator==(const ExogenousMatrix&, const ExogenousMatrix&) = default;

private:
    Date first_week_;
    std::vector<ExogRow> rows_;
};

/// One row per series week. week_of_month = 1 + (day_of_month - 1) / 7 of the week start.
ExogenousMatrix build_exogenous(const WeeklySeries& series, const ReleaseCalendar& calendar);

/// Covariates for the `horizon` weeks following `last_week`.
ExogenousMatrix build_future_exogenous(Date last_week, std::size_t horizon, const ReleaseCalendar& calendar);

std::string format_exogenous_csv(const ExogenousMatrix& exog);

struct LagRow {
    double target = 0.0;
    /// values[t-1], values[t-2], ..., values[t-L].
    std::vector<double> lags;
    std::optional<ExogRow> exog;
};

struct LagMatrix {
    std::size_t lag_count = 0;
    std::vector<LagRow> rows;

    /// Lags followed by exogenous columns when present.
    [[nodiscard]] std::size_t feature_count() const;
    [[nodiscard]] std::vector<double> features(std::size_t row) const;
};

/// Supervised rows for t = L..n-1. When `exog` is supplied it must align with
/// `values` and each row carries the covariates of its target week.
LagMatrix build_lag_matrix(std::span<const double> values, std::size_t lag_count,
                           const ExogenousMatrix* exog = nullptr);

/// State needed to undo a log-difference transform.
struct TransformState {
    double first_value = 1.0;
};

struct LogDifference {
    std::vector<double> transformed;
    TransformState state;
};

/// transformed[i] = ln(v[i+1]) - ln(v[i]). Throws ErrorKind::TransformDomain on v <= 0.
LogDifference log_difference(std::span<const double> values);
std::vector<double> inverse_log_difference(std::span<const double> transformed, const TransformState& state);

/// max(count, 1); keeps zero counts inside the log domain.
double clamp_for_log(double count);

}  // namespace bugcast
