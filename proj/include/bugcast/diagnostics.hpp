#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bugcast/ingest.hpp"

namespace bugcast {

struct CriticalValues {
    double one_pct = 0.0;
    double five_pct = 0.0;
    double ten_pct = 0.0;
};

/**
 * Augmented Dickey-Fuller test result (constant-only regression).
 *
 * Null hypothesis: the series has a unit root. A small p-value is evidence of stationarity.
 */
struct AdfResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t chosen_lag = 0;
    std::size_t n_obs_used = 0;
    CriticalValues critical_values;
    bool reject_at_5pct = false;
};

/// floor(12 * (n / 100)^(1/4)).
std::size_t schwert_max_lag(std::size_t n);

/**
 * Runs the ADF test on `values`, selecting the number of lagged differences in
 * [0, max_lag] by AIC.
 *
 * Every candidate lag is fitted on the common sample defined by `max_lag`; the
 * winning lag is then refitted on the largest sample it allows and its t-statistic
 * on y_{t-1} is reported. P-values use MacKinnon's response surface for the
 * constant-only case.
 *
 * Throws InsufficientDataError when fewer than max_lag + 10 values are supplied and
 * ErrorKind::Degenerate for constant input.
 */
AdfResult adf_test(std::span<const double> values, std::size_t max_lag);
AdfResult adf_test(const WeeklySeries& series, std::size_t max_lag);
/// Uses schwert_max_lag(series.size()).
AdfResult adf_test(const WeeklySeries& series);

/// MacKinnon (1994) approximate asymptotic p-value for the constant-only ADF statistic.
double mackinnon_p_value(double statistic);
/// MacKinnon (2010) finite-sample critical values for the constant-only case.
CriticalValues mackinnon_critical_values(std::size_t n_obs);

enum class CorrelogramKind { Acf, Pacf };

struct Correlogram {
    CorrelogramKind kind = CorrelogramKind::Acf;
    /// values[k] for lag k = 0..max_lag.
    std::vector<double> values;
    /// 1.96 / sqrt(n).
    double confidence_band = 0.0;

    [[nodiscard]] std::size_t max_lag() const { return values.empty() ? 0 : values.size() - 1; }
};

/// Biased-denominator sample autocorrelation. Requires 1 <= max_lag < n.
Correlogram acf(std::span<const double> values, std::size_t max_lag);
Correlogram acf(const WeeklySeries& series, std::size_t max_lag);

/// Partial autocorrelation via the Durbin-Levinson recursion on the sample ACF.
/// Requires 1 <= max_lag < n / 2.
Correlogram pacf(std::span<const double> values, std::size_t max_lag);
Correlogram pacf(const WeeklySeries& series, std::size_t max_lag);

struct OrderSuggestion {
    std::size_t p = 0;
    std::size_t q = 0;
};

/// Cutoff lag of each correlogram: the last lag outside the band before the first
/// run of three consecutive inside-band lags. Advisory only.
OrderSuggestion suggest_orders(const Correlogram& acf_values, const Correlogram& pacf_values);

}  // namespace bugcast
