#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bugcast/models.hpp"

namespace bugcast {

/// Row-major feature matrix with a target per row.
struct TrainingTable {
    std::size_t n_features = 0;
    std::vector<double> x;
    std::vector<double> y;

    [[nodiscard]] std::size_t rows() const { return y.size(); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {x.data() + i * n_features, n_features};
    }
};

/// Turns a lag matrix into a training table (lags first, covariates after).
TrainingTable to_training_table(const LagMatrix& lagmat);

struct TreeParams {
    std::size_t candidate_features = 1;
    std::size_t min_samples_leaf = 1;
};

/// CART regression tree. Splits minimise the summed squared error of the two children.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  ///< -1 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    RegressionTree() = default;
    explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    /// Grows a tree on the rows listed in `sample` (repeats allowed).
    static RegressionTree build(const TrainingTable& table, std::span<const std::size_t> sample,
                                const TreeParams& params, std::mt19937_64& rng);

    [[nodiscard]] double predict(std::span<const double> features) const;
    [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }

private:
    std::vector<Node> nodes_;
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::size_t n_features, std::vector<RegressionTree> trees)
        : n_features_(n_features), trees_(std::move(trees)) {}

    /// Tree i uses a generator seeded with seed + i, so the result does not depend on
    /// the number of worker threads.
    static RandomForest fit(const TrainingTable& table, const RfParams& params, std::uint64_t seed);

    [[nodiscard]] double predict(std::span<const double> features) const;
    [[nodiscard]] std::size_t n_features() const { return n_features_; }
    [[nodiscard]] std::span<const RegressionTree> trees() const { return trees_; }

private:
    std::size_t n_features_ = 0;
    std::vector<RegressionTree> trees_;
};

/// ceil(sqrt(n)) or n.
std::size_t candidate_feature_count(MaxFeatures mode, std::size_t n_features);

/// Random-forest regression on the lagged series (plus target-week covariates).
RandomForest rf_fit(const LagMatrix& lagmat, const RfParams& params, std::uint64_t seed);

class ForestState final : public ModelState {
public:
    ForestState(RfParams params, RandomForest forest) : params_(params), forest_(std::move(forest)) {}

    [[nodiscard]] const RandomForest& forest() const { return forest_; }

    double predict_next(std::span<const double> history, std::span<const ExogRow> exog_history,
                        const ExogRow* target_exog) const override;
    nlohmann::json to_json() const override;
    static std::shared_ptr<const ForestState> from_json(const nlohmann::json& doc, const RfParams& params);

private:
    RfParams params_;
    RandomForest forest_;
};

}  // namespace bugcast
