#include "bugcast/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bugcast/error.hpp"
#include "bugcast/ols.hpp"

namespace bugcast {

namespace {

// MacKinnon (1994) response surface, constant-only regression, one variable.
constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr double kSmallP[] = {2.1659, 1.4412, 3.8269e-2};
constexpr double kLargeP[] = {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2};

// MacKinnon (2010) finite-sample critical values: c0 + c1/T + c2/T^2 + c3/T^3.
constexpr double kCrit[3][4] = {
    {-3.43035, -6.5393, -16.786, -79.433},
    {-2.86154, -2.8903, -4.234, -40.040},
    {-2.56677, -1.5384, -2.809, 0.0},
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double crit(const double (&c)[4], double n) { return c[0] + c[1] / n + c[2] / (n * n) + c[3] / (n * n * n); }

/// Regressors [1, y_{t-1}, Δy_{t-1}..Δy_{t-lag}] and target Δy_t for the last `nobs` differences.
OlsResult adf_regression(std::span<const double> y, const std::vector<double>& dy, std::size_t lag, std::size_t nobs) {
    const std::size_t first = dy.size() - nobs;  // index into dy of first target
    Eigen::MatrixXd x(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(lag + 2));
    Eigen::VectorXd target(static_cast<Eigen::Index>(nobs));
    for (std::size_t r = 0; r < nobs; ++r) {
        const std::size_t t = first + r;  // dy[t] = y[t+1] - y[t]
        const auto row = static_cast<Eigen::Index>(r);
        target(row) = dy[t];
        x(row, 0) = 1.0;
        x(row, 1) = y[t];
        for (std::size_t i = 1; i <= lag; ++i) x(row, static_cast<Eigen::Index>(i + 1)) = dy[t - i];
    }
    return ols(x, target);
}

std::vector<double> autocorrelations(std::span<const double> values, std::size_t max_lag) {
    const auto n = values.size();
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double denom = 0.0;
    for (double v : values) denom += (v - mean) * (v - mean);
    std::vector<double> out(max_lag + 1, 0.0);
    out[0] = 1.0;
    if (denom == 0.0) return out;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) num += (values[t] - mean) * (values[t + k] - mean);
        out[k] = num / denom;
    }
    return out;
}

std::size_t cutoff_lag(const Correlogram& c) {
    std::size_t last_outside = 0;
    std::size_t inside_run = 0;
    for (std::size_t k = 1; k < c.values.size(); ++k) {
        if (std::abs(c.values[k]) > c.confidence_band) {
            last_outside = k;
            inside_run = 0;
        } else if (++inside_run == 3) {
            return last_outside;
        }
    }
    // No cutoff inside the window: gradual decay, not a sharp drop.
    return 0;
}

}  // namespace

std::size_t schwert_max_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_p_value(double statistic) {
    if (statistic > kTauMax) return 1.0;
    if (statistic < kTauMin) return 0.0;
    double z = 0.0;
    if (statistic <= kTauStar) {
        z = kSmallP[0] + statistic * (kSmallP[1] + statistic * kSmallP[2]);
    } else {
        z = kLargeP[0] + statistic * (kLargeP[1] + statistic * (kLargeP[2] + statistic * kLargeP[3]));
    }
    return normal_cdf(z);
}

CriticalValues mackinnon_critical_values(std::size_t n_obs) {
    const auto n = static_cast<double>(n_obs);
    return {crit(kCrit[0], n), crit(kCrit[1], n), crit(kCrit[2], n)};
}

AdfResult adf_test(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    if (n < max_lag + 10) throw InsufficientDataError("ADF test", max_lag + 10, n);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) throw Error(ErrorKind::Degenerate, "ADF test on a constant series");

    std::vector<double> dy(n - 1);
    for (std::size_t t = 0; t + 1 < n; ++t) dy[t] = values[t + 1] - values[t];

    // Lag search on the common sample allowed by max_lag.
    const std::size_t common = dy.size() - max_lag;
    std::size_t best_lag = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        const double aic = adf_regression(values, dy, lag, common).aic();
        if (aic < best_aic) {
            best_aic = aic;
            best_lag = lag;
        }
    }

    const std::size_t nobs = dy.size() - best_lag;
    const auto fit = adf_regression(values, dy, best_lag, nobs);
    if (!(fit.std_errors(1) > 0.0)) throw Error(ErrorKind::Degenerate, "ADF regression has zero residual variance");

    AdfResult out;
    out.statistic = fit.beta(1) / fit.std_errors(1);
    out.p_value = mackinnon_p_value(out.statistic);
    out.chosen_lag = best_lag;
    out.n_obs_used = nobs;
    out.critical_values = mackinnon_critical_values(nobs);
    out.reject_at_5pct = out.p_value < 0.05;
    return out;
}

AdfResult adf_test(const WeeklySeries& series, std::size_t max_lag) {
    const auto v = series.values();
    return adf_test(v, max_lag);
}

AdfResult adf_test(const WeeklySeries& series) { return adf_test(series, schwert_max_lag(series.size())); }

Correlogram acf(std::span<const double> values, std::size_t max_lag) {
    const auto n = values.size();
    if (max_lag == 0 || max_lag >= n) {
        throw Error(ErrorKind::InvalidLag, "ACF max_lag must be in [1, " + std::to_string(n) + "), got " +
                                               std::to_string(max_lag));
    }
    return {CorrelogramKind::Acf, autocorrelations(values, max_lag), 1.96 / std::sqrt(static_cast<double>(n))};
}

Correlogram acf(const WeeklySeries& series, std::size_t max_lag) {
    const auto v = series.values();
    return acf(v, max_lag);
}

Correlogram pacf(std::span<const double> values, std::size_t max_lag) {
    const auto n = values.size();
    if (max_lag == 0 || 2 * max_lag >= n) {
        throw Error(ErrorKind::InvalidLag, "PACF max_lag must be in [1, n/2), got " + std::to_string(max_lag) +
                                               " for n = " + std::to_string(n));
    }
    const auto r = autocorrelations(values, max_lag);
    std::vector<double> out(max_lag + 1, 0.0);
    out[0] = 1.0;

    // Durbin-Levinson: phi[k][k] is the partial autocorrelation at lag k.
    std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
    double v = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * r[k - j];
        const double kk = v > 0.0 ? num / v : 0.0;
        phi[k] = kk;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - kk * prev[k - j];
        v *= (1.0 - kk * kk);
        out[k] = kk;
        prev = phi;
    }
    return {CorrelogramKind::Pacf, std::move(out), 1.96 / std::sqrt(static_cast<double>(n))};
}

Correlogram pacf(const WeeklySeries& series, std::size_t max_lag) {
    const auto v = series.values();
    return pacf(v, max_lag);
}

OrderSuggestion suggest_orders(const Correlogram& acf_values, const Correlogram& pacf_values) {
    return {cutoff_lag(pacf_values), cutoff_lag(acf_values)};
}

}  // namespace bugcast
