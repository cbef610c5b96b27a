#include "bugcast/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bugcast/error.hpp"
#include "json_util.hpp"

namespace bugcast {

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

MatrixXd sigmoid(const MatrixXd& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

void check_shape(const MatrixXd& m, Index rows, Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorKind::Shape, std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                                          std::to_string(cols));
    }
}

void check_weights(const LstmWeights& w) {
    const Index h = w.b_f.size();
    const Index cols = w.w_f.cols();
    if (cols <= h) throw Error(ErrorKind::Shape, "W_f has no input columns");
    check_shape(w.w_f, h, cols, "W_f");
    check_shape(w.w_i, h, cols, "W_i");
    check_shape(w.w_c, h, cols, "W_c");
    check_shape(w.w_o, h, cols, "W_o");
    check_shape(w.b_i, h, 1, "b_i");
    check_shape(w.b_c, h, 1, "b_c");
    check_shape(w.b_o, h, 1, "b_o");
}

struct StepCache {
    MatrixXd z;  // [h_prev; x]
    MatrixXd f, i, g, o;
    MatrixXd c_prev, tanh_c;
};

void append(std::vector<double>& out, const MatrixXd& m) { out.insert(out.end(), m.data(), m.data() + m.size()); }

void read_into(MatrixXd& m, std::span<const double> flat, std::size_t& pos) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), m.size(), m.data());
    pos += static_cast<std::size_t>(m.size());
}

void read_into(VectorXd& v, std::span<const double> flat, std::size_t& pos) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), v.size(), v.data());
    pos += static_cast<std::size_t>(v.size());
}

/// Forward pass over a batch; fills `cache` when given. Returns the final hidden state.
MatrixXd run_forward(const LstmWeights& w, const std::vector<MatrixXd>& steps, std::vector<StepCache>* cache) {
    const Index h = static_cast<Index>(w.units());
    const Index d = static_cast<Index>(w.input_size());
    const Index b = steps.empty() ? 0 : steps.front().cols();
    MatrixXd hidden = MatrixXd::Zero(h, b);
    MatrixXd cell = MatrixXd::Zero(h, b);
    MatrixXd z(h + d, b);
    if (cache) cache->resize(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (steps[k].rows() != d || steps[k].cols() != b) {
            throw Error(ErrorKind::Shape, "input step " + std::to_string(k) + " has the wrong shape");
        }
        z.topRows(h) = hidden;
        z.bottomRows(d) = steps[k];
        MatrixXd f = sigmoid((w.w_f * z).colwise() + w.b_f);
        MatrixXd i = sigmoid((w.w_i * z).colwise() + w.b_i);
        MatrixXd g = ((w.w_c * z).colwise() + w.b_c).array().tanh().matrix();
        MatrixXd o = sigmoid((w.w_o * z).colwise() + w.b_o);
        MatrixXd next_cell = (f.array() * cell.array() + i.array() * g.array()).matrix();
        MatrixXd tanh_c = next_cell.array().tanh().matrix();
        hidden = (o.array() * tanh_c.array()).matrix();
        if (cache) {
            auto& s = (*cache)[k];
            s.z = z;
            s.c_prev = std::move(cell);
            s.f = std::move(f);
            s.i = std::move(i);
            s.g = std::move(g);
            s.o = std::move(o);
            s.tanh_c = std::move(tanh_c);
        }
        cell = std::move(next_cell);
    }
    return hidden;
}

std::vector<MatrixXd> gather(const std::vector<MatrixXd>& all_steps, std::span<const std::size_t> cols) {
    std::vector<MatrixXd> out(all_steps.size());
    for (std::size_t k = 0; k < all_steps.size(); ++k) {
        out[k].resize(all_steps[k].rows(), static_cast<Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) out[k].col(static_cast<Index>(j)) = all_steps[k].col(static_cast<Index>(cols[j]));
    }
    return out;
}

ExogScaling fit_scaling(std::span<const ExogRow> exog) {
    ExogScaling s;
    if (exog.empty()) return s;
    s.mean.assign(ExogRow::kColumns, 0.0);
    s.scale.assign(ExogRow::kColumns, 0.0);
    for (const auto& r : exog) {
        const auto a = r.as_array();
        for (std::size_t j = 0; j < a.size(); ++j) s.mean[j] += a[j];
    }
    for (auto& m : s.mean) m /= static_cast<double>(exog.size());
    for (const auto& r : exog) {
        const auto a = r.as_array();
        for (std::size_t j = 0; j < a.size(); ++j) s.scale[j] += (a[j] - s.mean[j]) * (a[j] - s.mean[j]);
    }
    for (auto& v : s.scale) {
        v = std::sqrt(v / static_cast<double>(exog.size()));
        if (!(v > 0.0)) v = 1.0;
    }
    return s;
}

void fill_timestep(Eigen::Ref<Eigen::VectorXd> out, double z, const ExogRow* row, const ExogScaling& scaling) {
    out(0) = z;
    if (row) {
        const auto a = row->as_array();
        for (std::size_t j = 0; j < a.size(); ++j) out(static_cast<Index>(j + 1)) = (a[j] - scaling.mean[j]) / scaling.scale[j];
    }
}

}  // namespace

LstmWeights LstmWeights::zeros(std::size_t units, std::size_t input_size) {
    const auto h = static_cast<Index>(units);
    const auto cols = static_cast<Index>(units + input_size);
    LstmWeights w;
    w.w_f = w.w_i = w.w_c = w.w_o = MatrixXd::Zero(h, cols);
    w.b_f = w.b_i = w.b_c = w.b_o = VectorXd::Zero(h);
    return w;
}

LstmCellOutput lstm_cell_step(const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
                              const LstmWeights& weights) {
    check_weights(weights);
    const Index h = static_cast<Index>(weights.units());
    const Index d = static_cast<Index>(weights.input_size());
    check_shape(x, d, 1, "x_t");
    check_shape(h_prev, h, 1, "h_prev");
    check_shape(c_prev, h, 1, "c_prev");
    VectorXd z(h + d);
    z << h_prev, x;
    const VectorXd f = sigmoid(weights.w_f * z + weights.b_f);
    const VectorXd i = sigmoid(weights.w_i * z + weights.b_i);
    const VectorXd g = (weights.w_c * z + weights.b_c).array().tanh().matrix();
    const VectorXd o = sigmoid(weights.w_o * z + weights.b_o);
    LstmCellOutput out;
    out.c = (f.array() * c_prev.array() + i.array() * g.array()).matrix();
    out.h = (o.array() * out.c.array().tanh()).matrix();
    return out;
}

LstmNetwork LstmNetwork::initialize(std::size_t units, std::size_t input_size, std::mt19937_64& rng) {
    const auto h = static_cast<Index>(units);
    const auto d = static_cast<Index>(input_size);
    LstmNetwork net;
    net.cell = LstmWeights::zeros(units, input_size);

    // Input kernel: Glorot uniform over the stacked (d, 4h) kernel.
    std::uniform_real_distribution<double> input_init(-1.0, 1.0);
    const double input_limit = std::sqrt(6.0 / static_cast<double>(d + 4 * h));
    // Recurrent kernel: orthonormal columns of a Gaussian (4h, h) matrix.
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd gaussian(4 * h, h);
    for (Index c = 0; c < gaussian.cols(); ++c) {
        for (Index r = 0; r < gaussian.rows(); ++r) gaussian(r, c) = normal(rng);
    }
    Eigen::HouseholderQR<MatrixXd> qr(gaussian);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(4 * h, h);

    MatrixXd* gates[] = {&net.cell.w_f, &net.cell.w_i, &net.cell.w_c, &net.cell.w_o};
    for (Index g = 0; g < 4; ++g) {
        auto& w = *gates[g];
        w.leftCols(h) = q.middleRows(g * h, h);
        for (Index c = h; c < h + d; ++c) {
            for (Index r = 0; r < h; ++r) w(r, c) = input_limit * input_init(rng);
        }
    }
    net.cell.b_f.setOnes();

    const double head_limit = std::sqrt(6.0 / static_cast<double>(h + 1));
    net.head_w.resize(h);
    for (Index r = 0; r < h; ++r) net.head_w(r) = head_limit * input_init(rng);
    net.head_b = 0.0;
    return net;
}

std::size_t LstmNetwork::parameter_count() const {
    const auto h = units();
    const auto cols = h + input_size();
    return 4 * h * cols + 4 * h + h + 1;
}

std::vector<double> LstmNetwork::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    append(flat, cell.w_f);
    append(flat, cell.w_i);
    append(flat, cell.w_c);
    append(flat, cell.w_o);
    append(flat, cell.b_f);
    append(flat, cell.b_i);
    append(flat, cell.b_c);
    append(flat, cell.b_o);
    append(flat, head_w);
    flat.push_back(head_b);
    return flat;
}

void LstmNetwork::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw Error(ErrorKind::Shape, "expected " + std::to_string(parameter_count()) + " parameters, got " +
                                          std::to_string(flat.size()));
    }
    std::size_t pos = 0;
    read_into(cell.w_f, flat, pos);
    read_into(cell.w_i, flat, pos);
    read_into(cell.w_c, flat, pos);
    read_into(cell.w_o, flat, pos);
    read_into(cell.b_f, flat, pos);
    read_into(cell.b_i, flat, pos);
    read_into(cell.b_c, flat, pos);
    read_into(cell.b_o, flat, pos);
    read_into(head_w, flat, pos);
    head_b = flat[pos];
}

double LstmNetwork::forward(const MatrixXd& sequence) const {
    std::vector<MatrixXd> steps;
    steps.reserve(static_cast<std::size_t>(sequence.rows()));
    for (Index k = 0; k < sequence.rows(); ++k) steps.push_back(sequence.row(k).transpose());
    const MatrixXd h = run_forward(cell, steps, nullptr);
    return head_w.dot(h.col(0)) + head_b;
}

double LstmNetwork::loss(const std::vector<MatrixXd>& steps, const RowVectorXd& targets) const {
    const MatrixXd h = run_forward(cell, steps, nullptr);
    const RowVectorXd y = (head_w.transpose() * h).array() + head_b;
    return (y - targets).squaredNorm() / static_cast<double>(targets.size());
}

double LstmNetwork::loss_and_gradient(const std::vector<MatrixXd>& steps, const RowVectorXd& targets,
                                      std::vector<double>& gradient) const {
    const Index h = static_cast<Index>(units());
    const auto batch = static_cast<double>(targets.size());
    std::vector<StepCache> cache;
    const MatrixXd last_h = run_forward(cell, steps, &cache);
    const RowVectorXd y = (head_w.transpose() * last_h).array() + head_b;
    const RowVectorXd diff = y - targets;
    const double loss_value = diff.squaredNorm() / batch;

    const RowVectorXd dy = 2.0 * diff / batch;
    LstmWeights grad = LstmWeights::zeros(units(), input_size());
    const VectorXd d_head_w = last_h * dy.transpose();
    const double d_head_b = dy.sum();

    MatrixXd dh = head_w * dy;
    MatrixXd dc = MatrixXd::Zero(h, targets.size());
    for (std::size_t k = steps.size(); k-- > 0;) {
        const auto& s = cache[k];
        const ArrayXXd d_o = dh.array() * s.tanh_c.array();
        dc.array() += dh.array() * s.o.array() * (1.0 - s.tanh_c.array().square());
        const ArrayXXd d_f = dc.array() * s.c_prev.array();
        const ArrayXXd d_i = dc.array() * s.g.array();
        const ArrayXXd d_g = dc.array() * s.i.array();

        const MatrixXd a_f = (d_f * s.f.array() * (1.0 - s.f.array())).matrix();
        const MatrixXd a_i = (d_i * s.i.array() * (1.0 - s.i.array())).matrix();
        const MatrixXd a_g = (d_g * (1.0 - s.g.array().square())).matrix();
        const MatrixXd a_o = (d_o * s.o.array() * (1.0 - s.o.array())).matrix();

        grad.w_f.noalias() += a_f * s.z.transpose();
        grad.w_i.noalias() += a_i * s.z.transpose();
        grad.w_c.noalias() += a_g * s.z.transpose();
        grad.w_o.noalias() += a_o * s.z.transpose();
        grad.b_f += a_f.rowwise().sum();
        grad.b_i += a_i.rowwise().sum();
        grad.b_c += a_g.rowwise().sum();
        grad.b_o += a_o.rowwise().sum();

        MatrixXd dz = cell.w_f.transpose() * a_f;
        dz.noalias() += cell.w_i.transpose() * a_i;
        dz.noalias() += cell.w_c.transpose() * a_g;
        dz.noalias() += cell.w_o.transpose() * a_o;
        dh = dz.topRows(h);
        dc = (dc.array() * s.f.array()).matrix();
    }

    gradient.clear();
    gradient.reserve(parameter_count());
    append(gradient, grad.w_f);
    append(gradient, grad.w_i);
    append(gradient, grad.w_c);
    append(gradient, grad.w_o);
    append(gradient, grad.b_f);
    append(gradient, grad.b_i);
    append(gradient, grad.b_c);
    append(gradient, grad.b_o);
    append(gradient, d_head_w);
    gradient.push_back(d_head_b);
    return loss_value;
}

LstmDataset make_lstm_dataset(std::span<const double> values, std::size_t window, std::span<const ExogRow> exog,
                              const ExogScaling& scaling) {
    if (!exog.empty() && exog.size() != values.size()) {
        throw Error(ErrorKind::Alignment, "LSTM covariates do not align with the series");
    }
    if (values.size() < window + 2) throw InsufficientDataError("LSTM windows", window + 2, values.size());
    std::vector<double> clamped(values.begin(), values.end());
    for (double& v : clamped) v = clamp_for_log(v);
    const auto z = log_difference(clamped).transformed;  // z[j] belongs to week j + 1
    const Index input = exog.empty() ? 1 : static_cast<Index>(1 + ExogRow::kColumns);

    // Each timestep pairs a change with the covariates of the week after it, so the last
    // step carries the target week's row.
    LstmDataset ds;
    for (std::size_t j = window; j < z.size(); ++j) {
        MatrixXd sample(static_cast<Index>(window), input);
        for (std::size_t k = 0; k < window; ++k) {
            const std::size_t src = j - window + k;
            VectorXd row(input);
            fill_timestep(row, z[src], exog.empty() ? nullptr : &exog[src + 2], scaling);
            sample.row(static_cast<Index>(k)) = row.transpose();
        }
        ds.samples.push_back(std::move(sample));
        ds.targets.push_back(z[j]);
    }
    return ds;
}

double LstmState::predict_next(std::span<const double> history, std::span<const ExogRow> exog_history,
                               const ExogRow* target_exog) const {
    const std::size_t window = params_.window;
    if (history.size() < window + 1) throw InsufficientDataError("LSTM forecast", window + 1, history.size());
    if (use_exogenous_ && exog_history.size() != history.size()) {
        throw Error(ErrorKind::Alignment, "LSTM covariate history does not align with the series");
    }
    if (use_exogenous_ && !target_exog) throw Error(ErrorKind::Alignment, "LSTM forecast needs the target week's covariates");
    const std::size_t n = history.size();
    const Index input = static_cast<Index>(network_.input_size());
    MatrixXd sequence(static_cast<Index>(window), input);
    for (std::size_t k = 0; k < window; ++k) {
        const std::size_t week = n - window + k;  // z value ln x[week] - ln x[week - 1]
        const double z = std::log(clamp_for_log(history[week])) - std::log(clamp_for_log(history[week - 1]));
        VectorXd row(input);
        const ExogRow* next = !use_exogenous_ ? nullptr : week + 1 < n ? &exog_history[week + 1] : target_exog;
        fill_timestep(row, z, next, scaling_);
        sequence.row(static_cast<Index>(k)) = row.transpose();
    }
    const double step = network_.forward(sequence);
    return clamp_for_log(history.back()) * std::exp(step);
}

nlohmann::json LstmState::to_json() const {
    const auto& w = network_.cell;
    return {{"units", network_.units()},
            {"input_size", network_.input_size()},
            {"w_f", detail::matrix_to_json(w.w_f)},
            {"w_i", detail::matrix_to_json(w.w_i)},
            {"w_c", detail::matrix_to_json(w.w_c)},
            {"w_o", detail::matrix_to_json(w.w_o)},
            {"b_f", detail::to_decimal_array({w.b_f.data(), static_cast<std::size_t>(w.b_f.size())})},
            {"b_i", detail::to_decimal_array({w.b_i.data(), static_cast<std::size_t>(w.b_i.size())})},
            {"b_c", detail::to_decimal_array({w.b_c.data(), static_cast<std::size_t>(w.b_c.size())})},
            {"b_o", detail::to_decimal_array({w.b_o.data(), static_cast<std::size_t>(w.b_o.size())})},
            {"head_w", detail::to_decimal_array({network_.head_w.data(), static_cast<std::size_t>(network_.head_w.size())})},
            {"head_b", format_double(network_.head_b)},
            {"exog_mean", detail::to_decimal_array(scaling_.mean)},
            {"exog_scale", detail::to_decimal_array(scaling_.scale)},
            {"epoch_mse", detail::to_decimal_array(epoch_mse_)}};
}

std::shared_ptr<const LstmState> LstmState::from_json(const nlohmann::json& doc, const LstmParams& params,
                                                      bool use_exogenous) {
    LstmNetwork net;
    net.cell.w_f = detail::matrix_from_json(doc.at("w_f"));
    net.cell.w_i = detail::matrix_from_json(doc.at("w_i"));
    net.cell.w_c = detail::matrix_from_json(doc.at("w_c"));
    net.cell.w_o = detail::matrix_from_json(doc.at("w_o"));
    net.cell.b_f = detail::vector_from_json(doc.at("b_f"));
    net.cell.b_i = detail::vector_from_json(doc.at("b_i"));
    net.cell.b_c = detail::vector_from_json(doc.at("b_c"));
    net.cell.b_o = detail::vector_from_json(doc.at("b_o"));
    net.head_w = detail::vector_from_json(doc.at("head_w"));
    net.head_b = parse_double(doc.at("head_b").get<std::string>());
    try {
        check_weights(net.cell);
    } catch (const Error& e) {
        throw ParseError("inconsistent LSTM weights", e.what());
    }
    if (net.head_w.size() != net.cell.b_f.size()) throw ParseError("LSTM head does not match the cell width");
    ExogScaling scaling{detail::from_decimal_array(doc.at("exog_mean")), detail::from_decimal_array(doc.at("exog_scale"))};
    const std::size_t expected_input = use_exogenous ? 1 + ExogRow::kColumns : 1;
    if (net.input_size() != expected_input) throw ParseError("LSTM input width does not match the spec");
    if (use_exogenous && (scaling.mean.size() != ExogRow::kColumns || scaling.scale.size() != ExogRow::kColumns)) {
        throw ParseError("LSTM covariate scaling is incomplete");
    }
    return std::make_shared<LstmState>(params, use_exogenous, std::move(net), std::move(scaling),
                                       detail::from_decimal_array(doc.at("epoch_mse")));
}

std::shared_ptr<const LstmState> lstm_fit(std::span<const double> values, const LstmParams& params,
                                          std::span<const ExogRow> exog, std::uint64_t seed,
                                          const LstmState* warm_start) {
    if (values.size() < params.window + 2) throw InsufficientDataError("LSTM fit", params.window + 2, values.size());
    const bool use_exog = !exog.empty();
    const Index input = use_exog ? static_cast<Index>(1 + ExogRow::kColumns) : 1;
    const bool warm = warm_start && warm_start->network().units() == params.units &&
                      warm_start->network().input_size() == static_cast<std::size_t>(input);
    // Warm-started weights keep the covariate scaling they were trained under.
    const auto scaling = warm && use_exog ? warm_start->scaling() : fit_scaling(exog);
    const auto dataset = make_lstm_dataset(values, params.window, exog, scaling);
    const std::size_t n = dataset.targets.size();

    // Timestep-major layout: all_steps[k] is input x n.
    std::vector<MatrixXd> all_steps(params.window, MatrixXd(input, static_cast<Index>(n)));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t k = 0; k < params.window; ++k) {
            all_steps[k].col(static_cast<Index>(s)) = dataset.samples[s].row(static_cast<Index>(k)).transpose();
        }
    }
    const RowVectorXd all_targets = Eigen::Map<const RowVectorXd>(dataset.targets.data(), static_cast<Index>(n));

    std::mt19937_64 rng(seed);
    LstmNetwork net = warm ? warm_start->network() : LstmNetwork::initialize(params.units, static_cast<std::size_t>(input), rng);
    const std::size_t epochs = warm ? params.warm_epochs : params.epochs;

    auto theta = net.parameters();
    std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0), grad;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-7;
    std::size_t step = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> epoch_mse;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += params.batch_size) {
            const std::size_t stop = std::min(n, start + params.batch_size);
            const std::span<const std::size_t> cols(order.data() + start, stop - start);
            const auto steps = gather(all_steps, cols);
            RowVectorXd targets(static_cast<Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j) targets(static_cast<Index>(j)) = all_targets(static_cast<Index>(cols[j]));

            const double batch_loss = net.loss_and_gradient(steps, targets, grad);
            double norm_sq = 0.0;
            for (double g : grad) norm_sq += g * g;
            if (!std::isfinite(batch_loss) || !std::isfinite(norm_sq)) {
                throw Error(ErrorKind::Divergence, "LSTM training diverged at epoch " + std::to_string(epoch) +
                                                       " (learning rate " + format_double(params.learning_rate) + ")");
            }
            const double norm = std::sqrt(norm_sq);
            const double clip = norm > params.clip_norm ? params.clip_norm / norm : 1.0;

            ++step;
            const double lr_t = params.learning_rate * std::sqrt(1.0 - std::pow(beta2, static_cast<double>(step))) /
                                (1.0 - std::pow(beta1, static_cast<double>(step)));
            for (std::size_t p = 0; p < theta.size(); ++p) {
                const double g = grad[p] * clip;
                m[p] = beta1 * m[p] + (1.0 - beta1) * g;
                v[p] = beta2 * v[p] + (1.0 - beta2) * g * g;
                theta[p] -= lr_t * m[p] / (std::sqrt(v[p]) + eps);
            }
            net.set_parameters(theta);
        }
        const double mse = net.loss(all_steps, all_targets);
        if (!std::isfinite(mse)) {
            throw Error(ErrorKind::Divergence, "LSTM training diverged at epoch " + std::to_string(epoch) +
                                                   " (learning rate " + format_double(params.learning_rate) + ")");
        }
        epoch_mse.push_back(mse);
    }
    return std::make_shared<LstmState>(params, use_exog, std::move(net), scaling, std::move(epoch_mse));
}

}  // namespace bugcast
