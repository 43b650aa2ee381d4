#include "stinger/nn.hpp"

#include <cmath>

#include "stinger/error.hpp"

namespace stinger::nn {

namespace {

constexpr double kLeakySlope = 0.2;

Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
        case Activation::identity: return z;
        case Activation::relu: return z.cwiseMax(0.0);
        case Activation::leaky_relu: return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
        case Activation::tanh: return z.array().tanh().matrix();
    }
    return z;
}

// elementwise derivative of the activation, evaluated at the preactivation
Matrix derivative(const Matrix& z, Activation a) {
    switch (a) {
        case Activation::identity: return Matrix::Ones(z.rows(), z.cols());
        case Activation::relu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::leaky_relu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
        case Activation::tanh: {
            Matrix t = z.array().tanh().matrix();
            return (1.0 - t.array().square()).matrix();
        }
    }
    return Matrix::Ones(z.rows(), z.cols());
}

}  // namespace

std::vector<double> Gradients::flatten() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < weight.size(); ++l) {
        out.insert(out.end(), weight[l].data(), weight[l].data() + weight[l].size());
        out.insert(out.end(), bias[l].data(), bias[l].data() + bias[l].size());
    }
    return out;
}

Network::Network(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations,
                 std::mt19937_64& rng) {
    if (widths.size() != activations.size() + 1 || activations.empty())
        throw ParameterError("network needs one activation per layer");
    for (std::size_t l = 0; l < activations.size(); ++l) {
        const auto fan_in = widths[l], fan_out = widths[l + 1];
        if (fan_in == 0 || fan_out == 0) throw ParameterError("layer widths must be positive");
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        DenseLayer layer;
        layer.weight.resize(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
        layer.bias.resize(static_cast<Eigen::Index>(fan_out));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = dist(rng);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = dist(rng);
        layer.activation = activations[l];
        layers_.push_back(std::move(layer));
    }
}

Matrix Network::forward(const Matrix& x) const {
    Matrix h = x;
    for (const auto& layer : layers_) {
        Matrix z = h * layer.weight;
        z.rowwise() += layer.bias;
        h = activate(z, layer.activation);
    }
    return h;
}

Matrix Network::forward(const Matrix& x, Tape& tape) const {
    tape.inputs.clear();
    tape.preactivation.clear();
    Matrix h = x;
    for (const auto& layer : layers_) {
        tape.inputs.push_back(h);
        Matrix z = h * layer.weight;
        z.rowwise() += layer.bias;
        h = activate(z, layer.activation);
        tape.preactivation.push_back(std::move(z));
    }
    return h;
}

Gradients Network::backward(const Tape& tape, const Matrix& grad_output, Matrix* grad_input) const {
    Gradients g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Matrix delta = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        delta = delta.cwiseProduct(derivative(tape.preactivation[l], layer.activation));
        g.weight[l] = tape.inputs[l].transpose() * delta;
        g.bias[l] = delta.colwise().sum();
        if (l > 0 || grad_input) delta = delta * layer.weight.transpose();
    }
    if (grad_input) *grad_input = std::move(delta);
    return g;
}

std::size_t Network::input_width() const {
    return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.rows());
}

std::size_t Network::output_width() const {
    return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.cols());
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    return n;
}

std::vector<double> Network::parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers_) {
        out.insert(out.end(), layer.weight.data(), layer.weight.data() + layer.weight.size());
        out.insert(out.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
    }
    return out;
}

void Network::set_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) throw ContractError("parameter vector length mismatch");
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = values[pos++];
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = values[pos++];
    }
}

Gradients zeros_like(const Network& net) {
    Gradients g;
    for (const auto& layer : net.layers()) {
        g.weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
        g.bias.push_back(RowVector::Zero(layer.bias.size()));
    }
    return g;
}

Adam::Adam(const Network& net, AdamConfig config) : config_(config), m_(zeros_like(net)), v_(zeros_like(net)) {}

namespace {
constexpr double kFlush = 1e-200;
}  // namespace

void Adam::step(Network& net, const Gradients& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const double lr = config_.learning_rate * std::sqrt(c2) / c1;
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
        // decayed moments of idle units would otherwise sink into subnormals
        m = (m.array().abs() < kFlush).select(0.0, m);
        v = (v.array() < kFlush).select(0.0, v);
        param.array() -= lr * m.array() / (v.array().sqrt() + config_.epsilon);
    };
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update(layers[l].weight, m_.weight[l], v_.weight[l], grads.weight[l]);
        update(layers[l].bias, m_.bias[l], v_.bias[l], grads.bias[l]);
    }
}

}  // namespace stinger::nn
