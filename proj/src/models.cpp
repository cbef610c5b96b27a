#include "bugcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bugcast/arima.hpp"
#include "bugcast/error.hpp"
#include "bugcast/forest.hpp"
#include "bugcast/lstm.hpp"
#include "json_util.hpp"

namespace bugcast {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class NaiveState final : public ModelState {
public:
    double predict_next(std::span<const double> history, std::span<const ExogRow>, const ExogRow*) const override {
        return history.back();
    }
    json to_json() const override { return json::object(); }
};

/// Simple exponential smoothing, X̂_1 = X_1 and X̂_{t+1} = α X_t + (1 - α) X̂_t.
class ExpState final : public ModelState {
public:
    explicit ExpState(double alpha) : alpha_(alpha) {}

    double predict_next(std::span<const double> history, std::span<const ExogRow>, const ExogRow*) const override {
        double level = history.front();
        for (double x : history) level = alpha_ * x + (1.0 - alpha_) * level;
        return level;
    }
    json to_json() const override { return json::object(); }

private:
    double alpha_;
};

class WmaState final : public ModelState {
public:
    explicit WmaState(const WmaParams& params) : weights_(params.weights) {
        if (params.normalize) {
            const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
            for (double& w : weights_) w /= total;
        }
    }

    double predict_next(std::span<const double> history, std::span<const ExogRow>, const ExogRow*) const override {
        double out = 0.0;
        const auto n = history.size();
        for (std::size_t i = 0; i < weights_.size(); ++i) out += weights_[i] * history[n - 1 - i];
        return out;
    }
    json to_json() const override { return {{"effective_weights", detail::to_decimal_array(weights_)}}; }

private:
    std::vector<double> weights_;
};

json params_to_json(const ModelParams& params) {
    return std::visit(
        overloaded{
            [](const NaiveParams&) { return json::object(); },
            [](const ExpParams& p) { return json{{"alpha", p.alpha}}; },
            [](const WmaParams& p) { return json{{"weights", p.weights}, {"normalize", p.normalize}}; },
            [](const ArimaParams& p) { return json{{"p", p.p}, {"d", p.d}, {"q", p.q}}; },
            [](const RfParams& p) {
                return json{{"n_trees", p.n_trees},
                            {"max_features", p.max_features == MaxFeatures::Sqrt ? "sqrt" : "all"},
                            {"lag_count", p.lag_count},
                            {"min_samples_leaf", p.min_samples_leaf},
                            {"threads", p.threads}};
            },
            [](const LstmParams& p) {
                return json{{"units", p.units},           {"epochs", p.epochs},
                            {"window", p.window},         {"learning_rate", p.learning_rate},
                            {"batch_size", p.batch_size}, {"clip_norm", p.clip_norm},
                            {"warm_epochs", p.warm_epochs}};
            },
        },
        params);
}

ModelParams params_from_json(Family family, const json& doc) {
    switch (family) {
        case Family::Naive:
            return NaiveParams{};
        case Family::Exp: {
            ExpParams p;
            p.alpha = doc.value("alpha", p.alpha);
            return p;
        }
        case Family::Wma: {
            WmaParams p;
            p.weights = doc.value("weights", p.weights);
            p.normalize = doc.value("normalize", p.normalize);
            return p;
        }
        case Family::Arima: {
            ArimaParams p;
            p.p = doc.value("p", p.p);
            p.d = doc.value("d", p.d);
            p.q = doc.value("q", p.q);
            return p;
        }
        case Family::Rf: {
            RfParams p;
            p.n_trees = doc.value("n_trees", p.n_trees);
            const auto mf = doc.value("max_features", std::string("sqrt"));
            if (mf == "sqrt") {
                p.max_features = MaxFeatures::Sqrt;
            } else if (mf == "all") {
                p.max_features = MaxFeatures::All;
            } else {
                throw Error(ErrorKind::Validation, "max_features must be sqrt or all, got '" + mf + "'");
            }
            p.lag_count = doc.value("lag_count", p.lag_count);
            p.min_samples_leaf = doc.value("min_samples_leaf", p.min_samples_leaf);
            p.threads = doc.value("threads", p.threads);
            return p;
        }
        case Family::Lstm: {
            LstmParams p;
            p.units = doc.value("units", p.units);
            p.epochs = doc.value("epochs", p.epochs);
            p.window = doc.value("window", p.window);
            p.learning_rate = doc.value("learning_rate", p.learning_rate);
            p.batch_size = doc.value("batch_size", p.batch_size);
            p.clip_norm = doc.value("clip_norm", p.clip_norm);
            p.warm_epochs = doc.value("warm_epochs", p.warm_epochs);
            return p;
        }
    }
    throw Error(ErrorKind::Validation, "unknown model family");
}

json rows_to_json(std::span<const ExogRow> rows) {
    auto arr = json::array();
    for (const auto& r : rows) {
        const auto a = r.as_array();
        arr.push_back(detail::to_decimal_array(a));
    }
    return arr;
}

std::vector<ExogRow> rows_from_json(const json& arr) {
    std::vector<ExogRow> rows;
    for (const auto& item : arr) rows.push_back(ExogRow::from_array(detail::from_decimal_array(item)));
    return rows;
}

std::shared_ptr<const ModelState> state_from_json(const ForecasterSpec& spec, const json& state) {
    return std::visit(
        overloaded{
            [](const NaiveParams&) -> std::shared_ptr<const ModelState> { return std::make_shared<NaiveState>(); },
            [](const ExpParams& p) -> std::shared_ptr<const ModelState> {
                return std::make_shared<ExpState>(p.alpha);
            },
            [](const WmaParams& p) -> std::shared_ptr<const ModelState> { return std::make_shared<WmaState>(p); },
            [&](const ArimaParams& p) -> std::shared_ptr<const ModelState> { return ArimaState::from_json(state, p); },
            [&](const RfParams& p) -> std::shared_ptr<const ModelState> { return ForestState::from_json(state, p); },
            [&](const LstmParams& p) -> std::shared_ptr<const ModelState> {
                return LstmState::from_json(state, p, spec.use_exogenous);
            },
        },
        spec.params);
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::Naive:
            return "Naive";
        case Family::Exp:
            return "EXP";
        case Family::Wma:
            return "WMA";
        case Family::Arima:
            return "ARIMA";
        case Family::Rf:
            return "RF";
        case Family::Lstm:
            return "LSTM";
    }
    return "?";
}

Family parse_family(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "NAIVE" || upper == "BASE") return Family::Naive;
    if (upper == "EXP") return Family::Exp;
    if (upper == "WMA") return Family::Wma;
    if (upper == "ARIMA") return Family::Arima;
    if (upper == "RF") return Family::Rf;
    if (upper == "LSTM") return Family::Lstm;
    throw Error(ErrorKind::Validation, "unknown model family '" + std::string(text) + "'");
}

Family ForecasterSpec::family() const { return static_cast<Family>(params.index()); }

std::string ForecasterSpec::display_label() const {
    if (!label.empty()) return label;
    return to_string(family()) + (use_exogenous ? "x" : "");
}

void validate(const ForecasterSpec& spec) {
    const auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::Validation, spec.display_label() + ": " + msg);
    };
    const auto fam = spec.family();
    if (spec.use_exogenous && (fam == Family::Naive || fam == Family::Exp || fam == Family::Wma)) {
        fail("exogenous covariates are only supported by ARIMA, RF and LSTM");
    }
    if (spec.refit_interval && *spec.refit_interval == 0) fail("refit_interval must be positive");
    std::visit(overloaded{
                   [](const NaiveParams&) {},
                   [&](const ExpParams& p) {
                       if (!(p.alpha > 0.0 && p.alpha <= 1.0)) fail("alpha must lie in (0, 1]");
                   },
                   [&](const WmaParams& p) {
                       if (p.weights.empty()) fail("WMA needs at least one weight");
                       for (double w : p.weights) {
                           if (!(w > 0.0) || !std::isfinite(w)) fail("WMA weights must be positive");
                       }
                   },
                   [&](const ArimaParams& p) {
                       if (p.q > 0) fail("moving-average terms (q > 0) are not supported");
                   },
                   [&](const RfParams& p) {
                       if (p.n_trees == 0) fail("n_trees must be positive");
                       if (p.lag_count == 0) fail("lag_count must be positive");
                       if (p.min_samples_leaf == 0) fail("min_samples_leaf must be positive");
                   },
                   [&](const LstmParams& p) {
                       if (p.units == 0 || p.epochs == 0 || p.window == 0 || p.batch_size == 0) {
                           fail("units, epochs, window and batch_size must be positive");
                       }
                       if (!(p.learning_rate > 0.0)) fail("learning_rate must be positive");
                       if (!(p.clip_norm > 0.0)) fail("clip_norm must be positive");
                   },
               },
               spec.params);
}

std::size_t minimum_history(const ForecasterSpec& spec) {
    return std::visit(overloaded{
                          [](const NaiveParams&) -> std::size_t { return 1; },
                          [](const ExpParams&) -> std::size_t { return 1; },
                          [](const WmaParams& p) -> std::size_t { return p.weights.size(); },
                          [](const ArimaParams& p) -> std::size_t { return p.p + p.d + 10; },
                          [](const RfParams& p) -> std::size_t { return p.lag_count + 10; },
                          [](const LstmParams& p) -> std::size_t { return p.window + 10; },
                      },
                      spec.params);
}

FittedModel::FittedModel(ForecasterSpec spec, std::shared_ptr<const ModelState> state, std::vector<double> history,
                         std::vector<ExogRow> exog_history)
    : spec_(std::move(spec)),
      state_(std::move(state)),
      history_(std::move(history)),
      exog_history_(std::move(exog_history)) {}

std::vector<double> FittedModel::predict(std::size_t horizon, std::span<const ExogRow> future_exog) const {
    if (horizon == 0) throw Error(ErrorKind::Validation, "horizon must be positive");
    if (spec_.use_exogenous && future_exog.size() != horizon) {
        throw Error(ErrorKind::Alignment, spec_.display_label() + ": need " + std::to_string(horizon) +
                                              " future covariate rows, got " + std::to_string(future_exog.size()));
    }
    std::vector<double> work = history_;
    std::vector<ExogRow> work_exog = exog_history_;
    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const ExogRow* target = spec_.use_exogenous ? &future_exog[h] : nullptr;
        const double value = std::max(0.0, state_->predict_next(work, work_exog, target));
        out.push_back(value);
        work.push_back(value);
        if (target) work_exog.push_back(*target);
    }
    return out;
}

FittedModel FittedModel::absorb(double actual, const std::optional<ExogRow>& exog_row) const {
    if (spec_.use_exogenous && !exog_row) {
        throw Error(ErrorKind::Alignment, spec_.display_label() + ": covariate row required");
    }
    auto history = history_;
    history.push_back(actual);
    auto exog = exog_history_;
    if (spec_.use_exogenous) exog.push_back(*exog_row);
    return FittedModel(spec_, state_, std::move(history), std::move(exog));
}

FittedModel fit(const ForecasterSpec& spec, std::span<const double> values, std::span<const ExogRow> exog,
                const FittedModel* warm_start) {
    validate(spec);
    const auto label = spec.display_label();
    const auto required = minimum_history(spec);
    if (values.size() < required) throw InsufficientDataError(label + " fit", required, values.size());
    if (spec.use_exogenous && exog.size() != values.size()) {
        throw Error(ErrorKind::Alignment, label + ": covariates have " + std::to_string(exog.size()) + " rows for " +
                                              std::to_string(values.size()) + " observations");
    }
    if (!spec.use_exogenous) exog = {};

    std::shared_ptr<const ModelState> state = std::visit(
        overloaded{
            [](const NaiveParams&) -> std::shared_ptr<const ModelState> { return std::make_shared<NaiveState>(); },
            [](const ExpParams& p) -> std::shared_ptr<const ModelState> {
                return std::make_shared<ExpState>(p.alpha);
            },
            [](const WmaParams& p) -> std::shared_ptr<const ModelState> { return std::make_shared<WmaState>(p); },
            [&](const ArimaParams& p) -> std::shared_ptr<const ModelState> {
                return std::make_shared<ArimaState>(p, arima_fit_css(values, p, exog));
            },
            [&](const RfParams& p) -> std::shared_ptr<const ModelState> {
                std::optional<ExogenousMatrix> em;
                if (!exog.empty()) em.emplace(Date{}, std::vector<ExogRow>(exog.begin(), exog.end()));
                const auto lagmat = build_lag_matrix(values, p.lag_count, em ? &*em : nullptr);
                return std::make_shared<ForestState>(p, rf_fit(lagmat, p, spec.seed));
            },
            [&](const LstmParams& p) -> std::shared_ptr<const ModelState> {
                const LstmState* warm = warm_start ? warm_start->state_as<LstmState>() : nullptr;
                return lstm_fit(values, p, exog, spec.seed, warm);
            },
        },
        spec.params);

    return FittedModel(spec, std::move(state), std::vector<double>(values.begin(), values.end()),
                       std::vector<ExogRow>(exog.begin(), exog.end()));
}

FittedModel fit(const ForecasterSpec& spec, const WeeklySeries& series, const ExogenousMatrix* exog) {
    if (exog && exog->size() != series.size()) {
        throw Error(ErrorKind::Alignment, spec.display_label() + ": covariates have " + std::to_string(exog->size()) +
                                              " rows for " + std::to_string(series.size()) + " weeks");
    }
    if (spec.use_exogenous && !exog) {
        throw Error(ErrorKind::Alignment, spec.display_label() + ": exogenous model fitted without covariates");
    }
    const auto values = series.values();
    return fit(spec, values, exog ? exog->rows() : std::span<const ExogRow>{});
}

json spec_to_json(const ForecasterSpec& spec) {
    json doc{{"label", spec.label},
             {"family", to_string(spec.family())},
             {"use_exogenous", spec.use_exogenous},
             {"seed", spec.seed},
             {"params", params_to_json(spec.params)}};
    if (spec.refit_interval) doc["refit_interval"] = *spec.refit_interval;
    return doc;
}

ForecasterSpec spec_from_json(const json& doc) {
    try {
        ForecasterSpec spec;
        const auto family = parse_family(doc.at("family").get<std::string>());
        spec.label = doc.value("label", std::string());
        spec.use_exogenous = doc.value("use_exogenous", false);
        spec.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("refit_interval")) spec.refit_interval = doc["refit_interval"].get<std::size_t>();
        spec.params = params_from_json(family, doc.value("params", json::object()));
        validate(spec);
        return spec;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("invalid model spec: ") + e.what());
    }
}

std::string model_to_json(const FittedModel& model) {
    json doc{{"format", "bugcast-model"},
             {"version", 1},
             {"spec", spec_to_json(model.spec())},
             {"state", model.state().to_json()},
             {"history", detail::to_decimal_array(model.history())},
             {"exog_history", rows_to_json(model.exog_history())}};
    return doc.dump(1) + "\n";
}

FittedModel model_from_json(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        if (doc.at("format") != "bugcast-model") throw ParseError("not a bugcast model document");
        if (doc.at("version").get<int>() != 1) {
            throw ParseError("unsupported model document version " + doc.at("version").dump());
        }
        auto spec = spec_from_json(doc.at("spec"));
        auto state = state_from_json(spec, doc.at("state"));
        return FittedModel(std::move(spec), std::move(state), detail::from_decimal_array(doc.at("history")),
                           rows_from_json(doc.at("exog_history")));
    } catch (const json::exception& e) {
        throw ParseError("malformed model document", e.what());
    }
}

}  // namespace bugcast
