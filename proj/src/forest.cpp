#include "bugcast/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "bugcast/error.hpp"
#include "json_util.hpp"

namespace bugcast {

TrainingTable to_training_table(const LagMatrix& lagmat) {
    TrainingTable table;
    table.n_features = lagmat.feature_count();
    table.x.reserve(lagmat.rows.size() * table.n_features);
    table.y.reserve(lagmat.rows.size());
    for (std::size_t i = 0; i < lagmat.rows.size(); ++i) {
        const auto f = lagmat.features(i);
        table.x.insert(table.x.end(), f.begin(), f.end());
        table.y.push_back(lagmat.rows[i].target);
    }
    return table;
}

std::size_t candidate_feature_count(MaxFeatures mode, std::size_t n_features) {
    if (mode == MaxFeatures::All) return n_features;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
}

namespace {

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

double node_sse(const TrainingTable& table, std::span<const std::size_t> idx, double& mean) {
    double sum = 0.0;
    for (auto i : idx) sum += table.y[i];
    mean = sum / static_cast<double>(idx.size());
    double sse = 0.0;
    for (auto i : idx) sse += (table.y[i] - mean) * (table.y[i] - mean);
    return sse;
}

/// Best threshold on one feature; false when the feature is constant within the node.
bool best_split_on(const TrainingTable& table, std::vector<std::size_t>& idx, std::size_t feature,
                   std::size_t min_leaf, Split& best) {
    const auto value = [&](std::size_t i) { return table.x[i * table.n_features + feature]; };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double va = value(a), vb = value(b);
        return va < vb || (va == vb && a < b);
    });
    if (value(idx.front()) == value(idx.back())) return false;

    const std::size_t n = idx.size();
    double total = 0.0, total_sq = 0.0;
    for (auto i : idx) {
        total += table.y[i];
        total_sq += table.y[i] * table.y[i];
    }
    double left = 0.0, left_sq = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double y = table.y[idx[k - 1]];
        left += y;
        left_sq += y * y;
        if (k < min_leaf || n - k < min_leaf) continue;
        const double lo = value(idx[k - 1]), hi = value(idx[k]);
        if (lo == hi) continue;
        const double nl = static_cast<double>(k), nr = static_cast<double>(n - k);
        const double right = total - left, right_sq = total_sq - left_sq;
        const double sse = (left_sq - left * left / nl) + (right_sq - right * right / nr);
        if (sse < best.sse) {
            best.sse = sse;
            best.feature = feature;
            best.threshold = lo + 0.5 * (hi - lo);
            if (best.threshold >= hi) best.threshold = lo;
        }
    }
    return true;
}

}  // namespace

RegressionTree RegressionTree::build(const TrainingTable& table, std::span<const std::size_t> sample,
                                     const TreeParams& params, std::mt19937_64& rng) {
    if (sample.empty()) throw Error(ErrorKind::InsufficientData, "regression tree needs at least one row");
    const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
    const std::size_t candidates = std::clamp<std::size_t>(params.candidate_features, 1, table.n_features);

    std::vector<Node> nodes;
    struct Pending {
        int node;
        std::vector<std::size_t> idx;
    };
    std::vector<Pending> stack;
    nodes.push_back({});
    stack.push_back({0, {sample.begin(), sample.end()}});
    std::vector<std::size_t> features(table.n_features);

    while (!stack.empty()) {
        auto [node_id, idx] = std::move(stack.back());
        stack.pop_back();
        double mean = 0.0;
        const double sse = node_sse(table, idx, mean);
        nodes[static_cast<std::size_t>(node_id)].value = mean;
        if (idx.size() < 2 * min_leaf || sse <= 1e-12 * static_cast<double>(idx.size())) continue;

        // Visit features in random order until `candidates` non-constant ones were tried.
        std::iota(features.begin(), features.end(), std::size_t{0});
        Split best;
        std::size_t tried = 0;
        for (std::size_t j = 0; j < features.size() && tried < candidates; ++j) {
            std::uniform_int_distribution<std::size_t> pick(j, features.size() - 1);
            std::swap(features[j], features[pick(rng)]);
            if (best_split_on(table, idx, features[j], min_leaf, best)) ++tried;
        }
        if (!std::isfinite(best.sse) || best.sse >= sse) continue;

        std::vector<std::size_t> left, right;
        for (auto i : idx) {
            (table.x[i * table.n_features + best.feature] <= best.threshold ? left : right).push_back(i);
        }
        const int l = static_cast<int>(nodes.size());
        nodes.push_back({});
        const int r = static_cast<int>(nodes.size());
        nodes.push_back({});
        auto& n = nodes[static_cast<std::size_t>(node_id)];
        n.feature = static_cast<int>(best.feature);
        n.threshold = best.threshold;
        n.left = l;
        n.right = r;
        stack.push_back({r, std::move(right)});
        stack.push_back({l, std::move(left)});
    }
    return RegressionTree(std::move(nodes));
}

double RegressionTree::predict(std::span<const double> features) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
}

RandomForest RandomForest::fit(const TrainingTable& table, const RfParams& params, std::uint64_t seed) {
    if (table.rows() == 0) throw Error(ErrorKind::InsufficientData, "random forest needs a non-empty lag matrix");
    const std::size_t needed = 2 * params.min_samples_leaf;
    if (table.rows() < needed) throw InsufficientDataError("random forest", needed, table.rows());

    const TreeParams tree_params{candidate_feature_count(params.max_features, table.n_features),
                                 params.min_samples_leaf};
    std::vector<RegressionTree> trees(params.n_trees);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < trees.size(); t = next++) {
            std::mt19937_64 rng(seed + t);
            std::uniform_int_distribution<std::size_t> draw(0, table.rows() - 1);
            std::vector<std::size_t> sample(table.rows());
            for (auto& s : sample) s = draw(rng);
            trees[t] = RegressionTree::build(table, sample, tree_params, rng);
        }
    };
    std::size_t threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, trees.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    return RandomForest(table.n_features, std::move(trees));
}

double RandomForest::predict(std::span<const double> features) const {
    if (features.size() != n_features_) {
        throw Error(ErrorKind::Shape, "forest expects " + std::to_string(n_features_) + " features, got " +
                                          std::to_string(features.size()));
    }
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(features);
    return sum / static_cast<double>(trees_.size());
}

RandomForest rf_fit(const LagMatrix& lagmat, const RfParams& params, std::uint64_t seed) {
    if (lagmat.rows.empty()) throw InsufficientDataError("random forest", 1, 0);
    return RandomForest::fit(to_training_table(lagmat), params, seed);
}

double ForestState::predict_next(std::span<const double> history, std::span<const ExogRow>,
                                 const ExogRow* target_exog) const {
    const std::size_t lags = params_.lag_count;
    if (history.size() < lags) throw InsufficientDataError("random forest forecast", lags, history.size());
    std::vector<double> features;
    features.reserve(forest_.n_features());
    for (std::size_t k = 1; k <= lags; ++k) features.push_back(history[history.size() - k]);
    if (forest_.n_features() > lags) {
        if (!target_exog) throw Error(ErrorKind::Alignment, "RF with covariates needs the target week's row");
        const auto a = target_exog->as_array();
        features.insert(features.end(), a.begin(), a.end());
    }
    return forest_.predict(features);
}

nlohmann::json ForestState::to_json() const {
    auto trees = nlohmann::json::array();
    for (const auto& tree : forest_.trees()) {
        std::vector<int> feature, left, right;
        std::vector<double> threshold, value;
        for (const auto& n : tree.nodes()) {
            feature.push_back(n.feature);
            left.push_back(n.left);
            right.push_back(n.right);
            threshold.push_back(n.threshold);
            value.push_back(n.value);
        }
        trees.push_back({{"feature", feature},
                         {"left", left},
                         {"right", right},
                         {"threshold", detail::to_decimal_array(threshold)},
                         {"value", detail::to_decimal_array(value)}});
    }
    return {{"n_features", forest_.n_features()}, {"trees", trees}};
}

std::shared_ptr<const ForestState> ForestState::from_json(const nlohmann::json& doc, const RfParams& params) {
    std::vector<RegressionTree> trees;
    for (const auto& t : doc.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto threshold = detail::from_decimal_array(t.at("threshold"));
        const auto value = detail::from_decimal_array(t.at("value"));
        const auto n = feature.size();
        if (left.size() != n || right.size() != n || threshold.size() != n || value.size() != n || n == 0) {
            throw ParseError("inconsistent tree arrays");
        }
        std::vector<RegressionTree::Node> nodes(n);
        for (std::size_t i = 0; i < n; ++i) {
            const bool leaf = feature[i] < 0;
            if (!leaf && (left[i] < 0 || right[i] < 0 || static_cast<std::size_t>(left[i]) >= n ||
                          static_cast<std::size_t>(right[i]) >= n)) {
                throw ParseError("tree child index out of range");
            }
            nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
        }
        trees.emplace_back(std::move(nodes));
    }
    return std::make_shared<ForestState>(params, RandomForest(doc.at("n_features").get<std::size_t>(), std::move(trees)));
}

}  // namespace bugcast
