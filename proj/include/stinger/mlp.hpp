#pragma once

#include <vector>

#include <json.hpp>

#include "stinger/nn.hpp"

namespace stinger {

struct MlpParams {
    std::size_t hidden_units = 100;
    int max_epochs = 400;
    double learning_rate = 0.1;
    double l2_alpha = 1e-4;
    std::size_t batch_size = 32;
    Seed seed = 0;

    void validate() const;
};

/// One ReLU hidden layer, two-way softmax output, Adam on cross-entropy
/// with an L2 penalty. Trains for the full epoch budget.
class Mlp {
public:
    Mlp() = default;

    /// Untrained network with seeded initial weights.
    static Mlp initialize(std::size_t input_dim, const MlpParams& params);
    static Mlp fit(const Matrix& x, const std::vector<int>& y, const MlpParams& params);

    /// n x 2 class probabilities (absence, presence).
    Matrix predict_proba(const Matrix& x) const;

    /// Mean cross-entropy over the rows plus alpha / (2 n) times the squared
    /// weight norm (biases are not penalized).
    double loss(const Matrix& x, const std::vector<int>& y) const;
    nn::Gradients gradient(const Matrix& x, const std::vector<int>& y) const;

    const std::vector<double>& loss_curve() const { return loss_curve_; }
    const nn::Network& network() const { return net_; }
    nn::Network& network() { return net_; }
    const MlpParams& params() const { return params_; }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

private:
    MlpParams params_;
    nn::Network net_;
    std::vector<double> loss_curve_;
};

}  // namespace stinger
