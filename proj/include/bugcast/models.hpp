#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bugcast/features.hpp"
#include "bugcast/ingest.hpp"

namespace bugcast {

enum class Family { Naive, Exp, Wma, Arima, Rf, Lstm };

std::string to_string(Family family);
Family parse_family(std::string_view text);

struct NaiveParams {
    friend bool operator==(const NaiveParams&, const NaiveParams&) = default;
};

struct ExpParams {
    double alpha = 0.5;
    friend bool operator==(const ExpParams&, const ExpParams&) = default;
};

/// Weights are newest-first.
struct WmaParams {
    std::vector<double> weights{0.66, 0.33};
    /// When false the raw weights are applied as given (they need not sum to one).
    bool normalize = true;
    friend bool operator==(const WmaParams&, const WmaParams&) = default;
};

struct ArimaParams {
    std::size_t p = 2;
    std::size_t d = 0;
    std::size_t q = 0;
    friend bool operator==(const ArimaParams&, const ArimaParams&) = default;
};

enum class MaxFeatures { Sqrt, All };

struct RfParams {
    std::size_t n_trees = 100;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    std::size_t lag_count = 4;
    std::size_t min_samples_leaf = 2;
    /// 0 selects std::thread::hardware_concurrency(). Output does not depend on it.
    std::size_t threads = 0;
    friend bool operator==(const RfParams&, const RfParams&) = default;
};

struct LstmParams {
    std::size_t units = 100;
    std::size_t epochs = 50;
    std::size_t window = 13;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    double clip_norm = 5.0;
    /// Epochs used when refitting from warm-started weights.
    std::size_t warm_epochs = 10;
    friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

using ModelParams = std::variant<NaiveParams, ExpParams, WmaParams, ArimaParams, RfParams, LstmParams>;

struct ForecasterSpec {
    std::string label;
    ModelParams params;
    bool use_exogenous = false;
    std::uint64_t seed = 0;
    /// Steps between refits during rolling evaluation; unset uses the split's value
    /// (LSTM defaults to 4).
    std::optional<std::size_t> refit_interval;

    [[nodiscard]] Family family() const;
    /// Explicit label, or the family name with an "x" suffix for exogenous variants.
    [[nodiscard]] std::string display_label() const;

    friend bool operator==(const ForecasterSpec&, const ForecasterSpec&) = default;
};

/// Throws ErrorKind::Validation describing the first violated constraint.
void validate(const ForecasterSpec& spec);

/// Smallest history `fit` accepts for this spec.
std::size_t minimum_history(const ForecasterSpec& spec);

/// Fitted parameters of one family. Implementations are immutable.
class ModelState {
public:
    virtual ~ModelState() = default;

    /// One-step forecast given the full working history (values and aligned covariates)
    /// and, for exogenous models, the covariates of the target week.
    [[nodiscard]] virtual double predict_next(std::span<const double> history,
                                              std::span<const ExogRow> exog_history,
                                              const ExogRow* target_exog) const = 0;

    [[nodiscard]] virtual nlohmann::json to_json() const = 0;
};

class FittedModel {
public:
    FittedModel(ForecasterSpec spec, std::shared_ptr<const ModelState> state, std::vector<double> history,
                std::vector<ExogRow> exog_history);

    [[nodiscard]] const ForecasterSpec& spec() const { return spec_; }
    [[nodiscard]] const ModelState& state() const { return *state_; }
    [[nodiscard]] std::shared_ptr<const ModelState> shared_state() const { return state_; }
    [[nodiscard]] std::span<const double> history() const { return history_; }
    [[nodiscard]] std::span<const ExogRow> exog_history() const { return exog_history_; }

    template <class State>
    [[nodiscard]] const State* state_as() const {
        return dynamic_cast<const State*>(state_.get());
    }

    /// Recursive multi-step forecast; each prediction (clamped at zero) is fed back as
    /// history. `future_exog` must hold exactly `horizon` rows for exogenous models.
    [[nodiscard]] std::vector<double> predict(std::size_t horizon,
                                              std::span<const ExogRow> future_exog = {}) const;

    /// Same parameters, history extended by an observed value.
    [[nodiscard]] FittedModel absorb(double actual, const std::optional<ExogRow>& exog_row = std::nullopt) const;

private:
    ForecasterSpec spec_;
    std::shared_ptr<const ModelState> state_;
    std::vector<double> history_;
    std::vector<ExogRow> exog_history_;
};

/// Fits `spec` on `values`. `exog` must be empty for plain models and match `values`
/// in length for exogenous ones. `warm_start`, when given and of the same family,
/// seeds iterative training (LSTM) with its parameters.
FittedModel fit(const ForecasterSpec& spec, std::span<const double> values, std::span<const ExogRow> exog = {},
                const FittedModel* warm_start = nullptr);
FittedModel fit(const ForecasterSpec& spec, const WeeklySeries& series, const ExogenousMatrix* exog = nullptr);

/// Versioned JSON document for a fitted model. Floating-point arrays are stored as
/// shortest round-trip decimal strings.
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(std::string_view text);

nlohmann::json spec_to_json(const ForecasterSpec& spec);
ForecasterSpec spec_from_json(const nlohmann::json& doc);

}  // namespace bugcast
