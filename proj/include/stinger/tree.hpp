#pragma once

#include <random>
#include <vector>

#include <json.hpp>

#include "stinger/types.hpp"

namespace stinger {

struct TreeParams {
    int max_depth = -1;                // negative: unlimited
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    std::size_t max_leaf_nodes = 0;    // 0: unlimited
    std::size_t max_features = 0;      // 0 or >= width: every feature, in column order
    double ccp_alpha = 0.0;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;  // rows with x <= threshold go left
    int left = -1;
    int right = -1;
    int depth = 0;
    double samples = 0.0;
    double positives = 0.0;
    double impurity = 0.0;  // Gini

    bool is_leaf() const { return feature < 0; }
    double presence_fraction() const { return samples > 0.0 ? positives / samples : 0.0; }
};

/// Binary CART classifier on Gini impurity. Growth is best-first (largest
/// weighted impurity decrease first) so a leaf budget keeps the most useful
/// splits; minimal cost-complexity pruning runs after growth.
class DecisionTree {
public:
    static DecisionTree fit(const Matrix& x, const std::vector<int>& y, const TreeParams& params,
                            std::mt19937_64* rng = nullptr);
    /// Same, restricted to `rows` (duplicates allowed, for bootstrap samples).
    static DecisionTree fit_rows(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                                 const TreeParams& params, std::mt19937_64* rng = nullptr);

    /// Collapses the weakest link while its effective alpha is <= `alpha`.
    void prune(double alpha);

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    std::vector<double> predict_proba(const Matrix& x) const;
    int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

    /// Weighted impurity decrease per column (not normalized).
    std::vector<double> impurity_decrease(std::size_t width) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t leaf_count() const;
    int depth() const;
    double total_samples() const { return nodes_.empty() ? 0.0 : nodes_.front().samples; }

    nlohmann::json to_json() const;
    static DecisionTree from_json(const nlohmann::json& j);

private:
    void compact();

    std::vector<TreeNode> nodes_;
};

double gini(double positives, double total);

}  // namespace stinger
