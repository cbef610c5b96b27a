#include "bugcast/ols.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bugcast/error.hpp"

namespace bugcast {

double OlsResult::aic() const {
    const auto n = static_cast<double>(n_obs);
    const double llf = -0.5 * n * (std::log(2.0 * std::numbers::pi) + std::log(ssr / n) + 1.0);
    return -2.0 * llf + 2.0 * static_cast<double>(beta.size());
}

OlsResult ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (n <= k) {
        throw Error(ErrorKind::RankDeficient, "regression has " + std::to_string(n) + " rows for " +
                                                  std::to_string(k) + " coefficients");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        throw Error(ErrorKind::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                                  std::to_string(k) + " columns");
    }
    OlsResult out;
    out.beta = qr.solve(y);
    out.n_obs = static_cast<std::size_t>(n);
    out.ssr = (y - x * out.beta).squaredNorm();

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();
    out.std_errors = (cov.diagonal() * out.sigma2()).cwiseSqrt();
    return out;
}

}  // namespace bugcast
