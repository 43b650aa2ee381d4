#pragma once

#include <vector>

#include <json.hpp>

#include "stinger/tree.hpp"

namespace stinger {

struct ForestParams {
    std::size_t n_trees = 150;
    bool bootstrap = false;
    int max_depth = 7;
    std::size_t min_samples_split = 10;
    std::size_t min_samples_leaf = 2;
    std::size_t max_leaf_nodes = 20;
    std::size_t max_features = 0;  // 0: ceil(log2 d)
    double ccp_alpha = 0.01;
    Seed seed = 0;

    void validate() const;
    TreeParams tree_params(std::size_t width) const;
};

std::size_t log2_features(std::size_t width);

class RandomForest {
public:
    RandomForest() = default;

    /// Trees grow in parallel on `threads` workers (0: hardware concurrency);
    /// each tree draws from its own stream so the result does not depend on it.
    static RandomForest fit(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                            unsigned threads = 1);

    /// Mean of the per-tree leaf presence fractions.
    std::vector<double> predict_proba(const Matrix& x) const;
    /// Presence when the mean probability is at least 0.5.
    std::vector<int> predict(const Matrix& x) const;

    /// Impurity decrease per encoded column, normalized to sum 1 (all zeros
    /// when no tree split).
    std::vector<double> importance() const;

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }
    std::size_t width() const { return width_; }

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& j);

private:
    ForestParams params_;
    std::size_t width_ = 0;
    std::vector<DecisionTree> trees_;
};

}  // namespace stinger
