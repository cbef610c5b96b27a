#include "bugcast/arima.hpp"

#include "bugcast/error.hpp"
#include "bugcast/ols.hpp"
#include "json_util.hpp"

namespace bugcast {

namespace {

/// Difference tables: levels[k] is the series differenced k times.
std::vector<std::vector<double>> difference_levels(std::span<const double> values, std::size_t d) {
    std::vector<std::vector<double>> levels;
    levels.emplace_back(values.begin(), values.end());
    for (std::size_t k = 0; k < d; ++k) {
        const auto& prev = levels.back();
        std::vector<double> next;
        next.reserve(prev.empty() ? 0 : prev.size() - 1);
        for (std::size_t t = 1; t < prev.size(); ++t) next.push_back(prev[t] - prev[t - 1]);
        levels.push_back(std::move(next));
    }
    return levels;
}

}  // namespace

ArimaCoefficients arima_fit_css(std::span<const double> values, const ArimaParams& params,
                                std::span<const ExogRow> exog) {
    if (params.q != 0) throw Error(ErrorKind::Validation, "moving-average terms (q > 0) are not supported");
    if (!exog.empty() && exog.size() != values.size()) {
        throw Error(ErrorKind::Alignment, "ARIMA covariates have " + std::to_string(exog.size()) + " rows for " +
                                              std::to_string(values.size()) + " values");
    }
    const std::size_t p = params.p;
    const std::size_t d = params.d;
    const std::size_t n_exog = exog.empty() ? 0 : ExogRow::kColumns;
    if (values.size() <= d) throw InsufficientDataError("ARIMA differencing", d + 1, values.size());

    const auto levels = difference_levels(values, d);
    const auto& w = levels.back();
    const std::size_t required = p + n_exog + 3;
    if (w.size() < required) throw InsufficientDataError("ARIMA regression", required + d, values.size());

    const std::size_t rows = w.size() - p;
    const std::size_t cols = 1 + p + n_exog;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = p + r;  // index into w
        const auto row = static_cast<Eigen::Index>(r);
        y(row) = w[t];
        x(row, 0) = 1.0;
        for (std::size_t i = 1; i <= p; ++i) x(row, static_cast<Eigen::Index>(i)) = w[t - i];
        if (n_exog > 0) {
            const auto a = exog[t + d].as_array();
            for (std::size_t j = 0; j < n_exog; ++j) x(row, static_cast<Eigen::Index>(1 + p + j)) = a[j];
        }
    }

    const auto fit = ols(x, y);
    ArimaCoefficients coef;
    coef.intercept = fit.beta(0);
    for (std::size_t i = 1; i <= p; ++i) coef.ar.push_back(fit.beta(static_cast<Eigen::Index>(i)));
    for (std::size_t j = 0; j < n_exog; ++j) coef.exog_betas.push_back(fit.beta(static_cast<Eigen::Index>(1 + p + j)));
    coef.std_errors.assign(fit.std_errors.data(), fit.std_errors.data() + fit.std_errors.size());
    coef.sigma2 = fit.sigma2();
    coef.n_obs = rows;
    return coef;
}

double arima_predict_next(const ArimaCoefficients& coef, const ArimaParams& params, std::span<const double> history,
                          const ExogRow* target_exog) {
    const std::size_t p = coef.ar.size();
    const std::size_t d = params.d;
    if (history.size() < p + d + 1) throw InsufficientDataError("ARIMA forecast", p + d + 1, history.size());
    if (!coef.exog_betas.empty() && !target_exog) {
        throw Error(ErrorKind::Alignment, "ARIMA with covariates needs the target week's row");
    }
    // Only the tail matters: p + d + 1 values suffice to rebuild every difference level.
    const auto tail = history.subspan(history.size() - (p + d + 1));
    const auto levels = difference_levels(tail, d);
    const auto& w = levels.back();

    double next = coef.intercept;
    for (std::size_t i = 1; i <= p; ++i) next += coef.ar[i - 1] * w[w.size() - i];
    if (target_exog) {
        const auto a = target_exog->as_array();
        for (std::size_t j = 0; j < coef.exog_betas.size(); ++j) next += coef.exog_betas[j] * a[j];
    }
    // Integrate back: next level-k value = last level-k value + next level-(k+1) value.
    for (std::size_t k = d; k-- > 0;) next += levels[k].back();
    return next;
}

double ArimaState::predict_next(std::span<const double> history, std::span<const ExogRow>,
                                const ExogRow* target_exog) const {
    return arima_predict_next(coef_, params_, history, target_exog);
}

nlohmann::json ArimaState::to_json() const {
    return {{"intercept", format_double(coef_.intercept)},
            {"ar", detail::to_decimal_array(coef_.ar)},
            {"exog_betas", detail::to_decimal_array(coef_.exog_betas)},
            {"std_errors", detail::to_decimal_array(coef_.std_errors)},
            {"sigma2", format_double(coef_.sigma2)},
            {"n_obs", coef_.n_obs}};
}

std::shared_ptr<const ArimaState> ArimaState::from_json(const nlohmann::json& doc, const ArimaParams& params) {
    ArimaCoefficients coef;
    coef.intercept = parse_double(doc.at("intercept").get<std::string>());
    coef.ar = detail::from_decimal_array(doc.at("ar"));
    coef.exog_betas = detail::from_decimal_array(doc.at("exog_betas"));
    coef.std_errors = detail::from_decimal_array(doc.at("std_errors"));
    coef.sigma2 = parse_double(doc.at("sigma2").get<std::string>());
    coef.n_obs = doc.at("n_obs").get<std::size_t>();
    if (coef.ar.size() != params.p) throw ParseError("ARIMA state does not match its order p");
    return std::make_shared<ArimaState>(params, std::move(coef));
}

}  // namespace bugcast
