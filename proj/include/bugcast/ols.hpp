#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace bugcast {

struct OlsResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd std_errors;
    double ssr = 0.0;
    std::size_t n_obs = 0;

    [[nodiscard]] double sigma2() const {
        return ssr / static_cast<double>(n_obs - static_cast<std::size_t>(beta.size()));
    }
    /// Gaussian AIC with the number of regressors as k.
    [[nodiscard]] double aic() const;
};

/// Least squares via column-pivoted QR. Throws ErrorKind::RankDeficient when `x` does not
/// have full column rank, or when there are no residual degrees of freedom.
OlsResult ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace bugcast
