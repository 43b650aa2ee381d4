#include "stinger/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stinger/error.hpp"

namespace stinger {

void MlpParams::validate() const {
    if (hidden_units == 0 || batch_size == 0) throw ParameterError("MLP sizes must be positive");
    if (max_epochs < 0) throw ParameterError("MLP epoch count must be non-negative");
    if (!(learning_rate > 0.0)) throw ParameterError("MLP learning rate must be positive");
    if (l2_alpha < 0.0) throw ParameterError("MLP alpha must be non-negative");
}

namespace {

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double top = logits.row(r).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(r).array() - top).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

double weight_norm_sq(const nn::Network& net) {
    double s = 0.0;
    for (const auto& layer : net.layers()) s += layer.weight.squaredNorm();
    return s;
}

void check_labels(const Matrix& x, const std::vector<int>& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ContractError("row and label counts differ");
}

}  // namespace

Mlp Mlp::initialize(std::size_t input_dim, const MlpParams& params) {
    params.validate();
    if (input_dim == 0) throw ParameterError("MLP input width must be positive");
    Mlp m;
    m.params_ = params;
    std::mt19937_64 rng(params.seed);
    m.net_ = nn::Network({input_dim, params.hidden_units, 2}, {nn::Activation::relu, nn::Activation::identity}, rng);
    return m;
}

Matrix Mlp::predict_proba(const Matrix& x) const {
    if (x.rows() == 0) return Matrix(0, 2);
    if (static_cast<std::size_t>(x.cols()) != net_.input_width()) throw ContractError("MLP input width mismatch");
    return softmax_rows(net_.forward(x));
}

double Mlp::loss(const Matrix& x, const std::vector<int>& y) const {
    check_labels(x, y);
    const Matrix p = predict_proba(x);
    const auto n = static_cast<double>(y.size());
    double ce = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        ce -= std::log(std::max(p(static_cast<Eigen::Index>(i), y[i]), 1e-300));
    return ce / n + 0.5 * params_.l2_alpha * weight_norm_sq(net_) / n;
}

nn::Gradients Mlp::gradient(const Matrix& x, const std::vector<int>& y) const {
    check_labels(x, y);
    nn::Tape tape;
    const Matrix p = softmax_rows(net_.forward(x, tape));
    const auto n = static_cast<double>(y.size());
    Matrix delta = p;
    for (std::size_t i = 0; i < y.size(); ++i) delta(static_cast<Eigen::Index>(i), y[i]) -= 1.0;
    delta /= n;
    nn::Gradients g = net_.backward(tape, delta);
    for (std::size_t l = 0; l < g.weight.size(); ++l) g.weight[l] += (params_.l2_alpha / n) * net_.layers()[l].weight;
    return g;
}

Mlp Mlp::fit(const Matrix& x, const std::vector<int>& y, const MlpParams& params) {
    check_labels(x, y);
    if (y.size() < 2) throw DataError("MLP training needs at least 2 rows");
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0)
        throw DataError("MLP training needs both classes");
    Mlp m = initialize(static_cast<std::size_t>(x.cols()), params);

    // the shuffle stream is separate from the initialization stream
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    nn::Adam adam(m.net_, {params.learning_rate, 0.9, 0.999, 1e-8});
    const auto n = y.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (std::size_t start = 0; start < n; start += params.batch_size) {
            const auto end = std::min(n, start + params.batch_size);
            Matrix xb(static_cast<Eigen::Index>(end - start), x.cols());
            std::vector<int> yb;
            for (std::size_t t = start; t < end; ++t) {
                xb.row(static_cast<Eigen::Index>(t - start)) = x.row(static_cast<Eigen::Index>(order[t]));
                yb.push_back(y[order[t]]);
            }
            const double batch_loss = m.loss(xb, yb);
            if (!std::isfinite(batch_loss)) throw TrainingDivergence("MLP loss became non-finite", epoch);
            total += batch_loss * static_cast<double>(end - start);
            adam.step(m.net_, m.gradient(xb, yb));
        }
        m.loss_curve_.push_back(total / static_cast<double>(n));
    }
    return m;
}

nlohmann::json Mlp::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net_.layers()) {
        layers.push_back({{"rows", layer.weight.rows()},
                          {"cols", layer.weight.cols()},
                          {"weight", std::vector<double>(layer.weight.data(), layer.weight.data() + layer.weight.size())},
                          {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
    }
    return {{"params",
             {{"hidden_units", params_.hidden_units},
              {"max_epochs", params_.max_epochs},
              {"learning_rate", params_.learning_rate},
              {"l2_alpha", params_.l2_alpha},
              {"batch_size", params_.batch_size},
              {"seed", params_.seed}}},
            {"layers", std::move(layers)},
            {"loss_curve", loss_curve_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
    MlpParams p;
    const auto& jp = j.at("params");
    p.hidden_units = jp.at("hidden_units").get<std::size_t>();
    p.max_epochs = jp.at("max_epochs").get<int>();
    p.learning_rate = jp.at("learning_rate").get<double>();
    p.l2_alpha = jp.at("l2_alpha").get<double>();
    p.batch_size = jp.at("batch_size").get<std::size_t>();
    p.seed = jp.at("seed").get<Seed>();
    const auto& layers = j.at("layers");
    Mlp m = initialize(layers.at(0).at("rows").get<std::size_t>(), p);
    std::vector<double> flat;
    for (const auto& jl : layers) {
        const auto w = jl.at("weight").get<std::vector<double>>();
        const auto b = jl.at("bias").get<std::vector<double>>();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), b.begin(), b.end());
    }
    m.net_.set_parameters(flat);
    m.loss_curve_ = j.value("loss_curve", std::vector<double>{});
    return m;
}

}  // namespace stinger
