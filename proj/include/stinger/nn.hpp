#pragma once

#include <random>
#include <span>
#include <vector>

#include "stinger/types.hpp"

namespace stinger::nn {

using RowVector = Eigen::RowVectorXd;

enum class Activation { identity, relu, leaky_relu, tanh };

struct DenseLayer {
    Matrix weight;  // fan_in x fan_out
    RowVector bias;
    Activation activation = Activation::identity;
};

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<RowVector> bias;

    std::vector<double> flatten() const;
};

/// Intermediate values kept by a forward pass for backpropagation.
struct Tape {
    std::vector<Matrix> inputs;       // input to each layer
    std::vector<Matrix> preactivation;
};

/// Fully connected feed-forward network, one activation per layer.
class Network {
public:
    Network() = default;
    /// `widths` has one more entry than `activations`. Weights and biases are
    /// drawn uniformly from +-sqrt(6 / (fan_in + fan_out)).
    Network(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations,
            std::mt19937_64& rng);

    Matrix forward(const Matrix& x) const;
    Matrix forward(const Matrix& x, Tape& tape) const;

    /// Gradients of a scalar loss given dLoss/dOutput. When `grad_input` is
    /// non-null it receives dLoss/dInput.
    Gradients backward(const Tape& tape, const Matrix& grad_output, Matrix* grad_input = nullptr) const;

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::size_t input_width() const;
    std::size_t output_width() const;
    std::size_t parameter_count() const;

    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);

private:
    std::vector<DenseLayer> layers_;
};

Gradients zeros_like(const Network& net);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam(const Network& net, AdamConfig config);
    void step(Network& net, const Gradients& grads);

private:
    AdamConfig config_;
    Gradients m_, v_;
    long t_ = 0;
};

}  // namespace stinger::nn
