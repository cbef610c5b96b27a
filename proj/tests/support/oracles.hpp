#pragma once

// Independent reference computations used only by tests. Nothing here calls into the
// library code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace oracle {

struct Metrics {
    double rmse, r_squared, error_pct, median_abs_error, error_std;
};

/// Direct formulas over the raw arrays.
inline Metrics metrics(const std::vector<double>& actual, const std::vector<double>& predicted) {
    const std::size_t n = actual.size();
    long double sq = 0, mean_a = 0, mean_e = 0, pct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double e = actual[i] - predicted[i];
        sq += e * e;
        mean_a += actual[i];
        mean_e += e;
        pct += std::fabs(static_cast<double>(e)) / actual[i];
    }
    mean_a /= n;
    mean_e /= n;
    long double ss_tot = 0, var_e = 0;
    std::vector<double> abs_e;
    for (std::size_t i = 0; i < n; ++i) {
        ss_tot += (actual[i] - mean_a) * (actual[i] - mean_a);
        const long double e = actual[i] - predicted[i];
        var_e += (e - mean_e) * (e - mean_e);
        abs_e.push_back(std::fabs(actual[i] - predicted[i]));
    }
    std::sort(abs_e.begin(), abs_e.end());
    const double median = n % 2 == 1 ? abs_e[n / 2] : (abs_e[n / 2 - 1] + abs_e[n / 2]) / 2.0;
    return {static_cast<double>(std::sqrt(sq / n)), static_cast<double>(1.0L - sq / ss_tot),
            static_cast<double>(pct / n), median, static_cast<double>(std::sqrt(var_e / n))};
}

/// Solves a small dense system by Gauss-Jordan elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

/// PACF at lag k as the last coefficient of a least-squares regression of the demeaned,
/// zero-padded series on its first k lags (no intercept). Padding makes the normal
/// equations use the biased autocovariances, so this estimates the same quantity as the
/// Durbin-Levinson recursion, by a different route.
inline std::vector<double> pacf_by_regression(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> out{1.0};
    for (std::size_t k = 1; k <= max_lag; ++k) {
        // Padded sample: y_t for t in [0, n + k), zero outside [0, n).
        const auto y = [&](long t) { return t >= 0 && t < static_cast<long>(n) ? x[static_cast<std::size_t>(t)] - mean : 0.0; };
        std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
        std::vector<double> xty(k, 0.0);
        for (long t = 0; t < static_cast<long>(n + k); ++t) {
            for (std::size_t i = 0; i < k; ++i) {
                const double xi = y(t - 1 - static_cast<long>(i));
                xty[i] += xi * y(t);
                for (std::size_t j = 0; j < k; ++j) xtx[i][j] += xi * y(t - 1 - static_cast<long>(j));
            }
        }
        out.push_back(solve(xtx, xty).back());
    }
    return out;
}

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

/// The six cell equations for a single unit with scalar input.
struct ScalarCell {
    double wf_h, wf_x, bf, wi_h, wi_x, bi, wc_h, wc_x, bc, wo_h, wo_x, bo;

    void step(double x, double& h, double& c) const {
        const double f = sigmoid(wf_h * h + wf_x * x + bf);
        const double i = sigmoid(wi_h * h + wi_x * x + bi);
        const double cand = std::tanh(wc_h * h + wc_x * x + bc);
        const double o = sigmoid(wo_h * h + wo_x * x + bo);
        c = f * c + i * cand;
        h = o * std::tanh(c);
    }
};

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto steps = gaussian(n, seed);
    for (std::size_t i = 1; i < n; ++i) steps[i] += steps[i - 1];
    return steps;
}

/// x_t = c + sum a_i x_{t-i} + e_t with a burn-in of 200 steps.
inline std::vector<double> ar_process(std::span<const double> coef, std::size_t n, std::uint64_t seed,
                                      double intercept = 0.0, double sd = 1.0) {
    const std::size_t burn = 200;
    const auto e = gaussian(n + burn, seed, sd);
    std::vector<double> x(n + burn, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double v = intercept + e[t];
        for (std::size_t i = 0; i < coef.size(); ++i) {
            if (t > i) v += coef[i] * x[t - 1 - i];
        }
        x[t] = v;
    }
    return {x.begin() + burn, x.end()};
}

}  // namespace oracle
