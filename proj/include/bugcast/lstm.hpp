#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bugcast/models.hpp"

namespace bugcast {

/// Gate weights of one LSTM cell. Each W_* acts on the concatenation [h_{t-1}, x_t], so it
/// has `units` rows and `units + input_size` columns (hidden part first).
struct LstmWeights {
    Eigen::MatrixXd w_f, w_i, w_c, w_o;
    Eigen::VectorXd b_f, b_i, b_c, b_o;

    static LstmWeights zeros(std::size_t units, std::size_t input_size);

    [[nodiscard]] std::size_t units() const { return static_cast<std::size_t>(b_f.size()); }
    [[nodiscard]] std::size_t input_size() const {
        return static_cast<std::size_t>(w_f.cols()) - units();
    }
};

struct LstmCellOutput {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/**
 * One cell update:
 *   f = σ(W_f[h,x] + b_f), i = σ(W_i[h,x] + b_i), ĉ = tanh(W_c[h,x] + b_c),
 *   c' = f∘c + i∘ĉ, o = σ(W_o[h,x] + b_o), h' = o∘tanh(c').
 * Throws ErrorKind::Shape naming the first inconsistent matrix.
 */
LstmCellOutput lstm_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev,
                              const LstmWeights& weights);

/// Single LSTM layer followed by a scalar affine head on the final hidden state.
class LstmNetwork {
public:
    LstmWeights cell;
    Eigen::VectorXd head_w;
    double head_b = 0.0;

    /// Glorot-uniform input weights, orthogonal-scale recurrent weights, forget bias 1.
    static LstmNetwork initialize(std::size_t units, std::size_t input_size, std::mt19937_64& rng);

    [[nodiscard]] std::size_t units() const { return cell.units(); }
    [[nodiscard]] std::size_t input_size() const { return cell.input_size(); }

    /// Flattened as w_f, w_i, w_c, w_o, b_f, b_i, b_c, b_o, head_w, head_b (column-major).
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    /// `sequence` is window x input_size, one timestep per row.
    [[nodiscard]] double forward(const Eigen::MatrixXd& sequence) const;

    /// `steps[k]` is input_size x batch for timestep k. Mean squared error over the batch.
    [[nodiscard]] double loss(const std::vector<Eigen::MatrixXd>& steps, const Eigen::RowVectorXd& targets) const;

    /// Loss plus its gradient by backpropagation through time, in parameters() order.
    double loss_and_gradient(const std::vector<Eigen::MatrixXd>& steps, const Eigen::RowVectorXd& targets,
                             std::vector<double>& gradient) const;
};

/// Column standardisation applied to covariates before they enter the network.
struct ExogScaling {
    std::vector<double> mean;
    std::vector<double> scale;
};

/// Supervised windows over the log-differenced series.
struct LstmDataset {
    std::vector<Eigen::MatrixXd> samples;  ///< window x input_size each
    std::vector<double> targets;
};

/// Builds training windows. Timestep k of a window holds the transformed value and, if
/// `exog` is non-empty, the scaled covariates of the week that value belongs to.
LstmDataset make_lstm_dataset(std::span<const double> values, std::size_t window, std::span<const ExogRow> exog,
                              const ExogScaling& scaling);

class LstmState final : public ModelState {
public:
    LstmState(LstmParams params, bool use_exogenous, LstmNetwork network, ExogScaling scaling,
              std::vector<double> epoch_mse)
        : params_(params),
          use_exogenous_(use_exogenous),
          network_(std::move(network)),
          scaling_(std::move(scaling)),
          epoch_mse_(std::move(epoch_mse)) {}

    [[nodiscard]] const LstmNetwork& network() const { return network_; }
    [[nodiscard]] const ExogScaling& scaling() const { return scaling_; }
    /// Training-set MSE after each epoch (transformed scale).
    [[nodiscard]] std::span<const double> epoch_mse() const { return epoch_mse_; }

    double predict_next(std::span<const double> history, std::span<const ExogRow> exog_history,
                        const ExogRow* target_exog) const override;
    nlohmann::json to_json() const override;
    static std::shared_ptr<const LstmState> from_json(const nlohmann::json& doc, const LstmParams& params,
                                                      bool use_exogenous);

private:
    LstmParams params_;
    bool use_exogenous_;
    LstmNetwork network_;
    ExogScaling scaling_;
    std::vector<double> epoch_mse_;
};

/**
 * Trains on the log-differenced series with mini-batch Adam, gradient-norm clipping and
 * full backpropagation through time. Throws ErrorKind::Divergence on a non-finite loss.
 */
std::shared_ptr<const LstmState> lstm_fit(std::span<const double> values, const LstmParams& params,
                                          std::span<const ExogRow> exog, std::uint64_t seed,
                                          const LstmState* warm_start = nullptr);

}  // namespace bugcast
