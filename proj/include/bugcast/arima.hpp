#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bugcast/features.hpp"
#include "bugcast/models.hpp"

namespace bugcast {

/// Conditional least-squares estimate of an ARIMA(p, d, 0) model with optional covariates.
struct ArimaCoefficients {
    double intercept = 0.0;
    std::vector<double> ar;          ///< alpha_1..alpha_p
    std::vector<double> exog_betas;  ///< one per covariate column
    /// Standard errors ordered intercept, ar..., exog_betas...
    std::vector<double> std_errors;
    double sigma2 = 0.0;
    std::size_t n_obs = 0;
};

/**
 * Differences `values` d times, then regresses W_t on [1, W_{t-1}..W_{t-p}, exog_t] by
 * ordinary least squares, conditioning on the first p differenced values.
 *
 * Requires q == 0. Throws ErrorKind::RankDeficient when the design matrix is singular.
 */
ArimaCoefficients arima_fit_css(std::span<const double> values, const ArimaParams& params,
                                std::span<const ExogRow> exog = {});

/// One-step forecast on the original scale.
double arima_predict_next(const ArimaCoefficients& coef, const ArimaParams& params,
                          std::span<const double> history, const ExogRow* target_exog);

class ArimaState final : public ModelState {
public:
    ArimaState(ArimaParams params, ArimaCoefficients coef) : params_(params), coef_(std::move(coef)) {}

    [[nodiscard]] const ArimaCoefficients& coefficients() const { return coef_; }

    double predict_next(std::span<const double> history, std::span<const ExogRow> exog_history,
                        const ExogRow* target_exog) const override;
    nlohmann::json to_json() const override;
    static std::shared_ptr<const ArimaState> from_json(const nlohmann::json& doc, const ArimaParams& params);

private:
    ArimaParams params_;
    ArimaCoefficients coef_;
};

}  // namespace bugcast
