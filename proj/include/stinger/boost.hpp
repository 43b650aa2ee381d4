#pragma once

#include <vector>

#include <json.hpp>

#include "stinger/types.hpp"

namespace stinger {

struct BoostParams {
    double learning_rate = 0.1;
    std::size_t n_rounds = 100;
    int max_depth = 2;
    double scale_pos_weight = 3.0;
    double lambda = 1.0;
    double min_child_weight = 1.0;
    Seed seed = 0;

    void validate() const;
};

struct RegressionNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf weight
    double gain = 0.0;
};

struct RegressionTree {
    std::vector<RegressionNode> nodes;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Second-order gradient boosting of depth-limited regression trees on the
/// log-odds, with positive rows weighted by scale_pos_weight.
class GradientBoosting {
public:
    GradientBoosting() = default;

    static GradientBoosting fit(const Matrix& x, const std::vector<int>& y, const BoostParams& params);

    std::vector<double> margin(const Matrix& x) const;
    std::vector<double> predict_proba(const Matrix& x) const;

    /// Total split gain per encoded column, normalized to sum 1.
    std::vector<double> importance() const;

    double base_score() const { return base_; }
    /// Weighted mean log-loss on the training rows: the initial value, then
    /// one entry per round.
    const std::vector<double>& loss_curve() const { return loss_curve_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }
    const BoostParams& params() const { return params_; }

    nlohmann::json to_json() const;
    static GradientBoosting from_json(const nlohmann::json& j);

private:
    BoostParams params_;
    std::size_t width_ = 0;
    double base_ = 0.0;
    std::vector<RegressionTree> trees_;
    std::vector<double> loss_curve_;
};

double weighted_log_loss(const std::vector<int>& y, const std::vector<double>& margin, double scale_pos_weight);

}  // namespace stinger
