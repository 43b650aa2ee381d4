#include "stinger/boost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stinger/error.hpp"

namespace stinger {

void BoostParams::validate() const {
    if (n_rounds < 1) throw ParameterError("n_rounds must be at least 1");
    if (max_depth < 1) throw ParameterError("max_depth must be at least 1");
    if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
    if (!(scale_pos_weight > 0.0)) throw ParameterError("scale_pos_weight must be positive");
    if (lambda < 0.0) throw ParameterError("lambda must be non-negative");
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        id = row[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
}

namespace {

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

struct TreeGrower {
    const Matrix& x;
    const std::vector<double>& g;
    const std::vector<double>& h;
    const BoostParams& p;
    RegressionTree tree;

    double score(double G, double H) const { return G * G / (H + p.lambda); }

    int grow(std::vector<std::size_t> rows, int depth) {
        double G = 0.0, H = 0.0;
        for (auto r : rows) {
            G += g[r];
            H += h[r];
        }
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.back().value = -G / (H + p.lambda);
        if (depth >= p.max_depth || rows.size() < 2) return id;

        double best_gain = 0.0;
        int best_f = -1;
        double best_t = 0.0;
        std::vector<std::size_t> order = rows;
        for (Eigen::Index f = 0; f < x.cols(); ++f) {
            std::sort(order.begin(), order.end(), [&](auto a, auto b) {
                return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
            });
            double GL = 0.0, HL = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                GL += g[order[i]];
                HL += h[order[i]];
                const double v = x(static_cast<Eigen::Index>(order[i]), f);
                const double next = x(static_cast<Eigen::Index>(order[i + 1]), f);
                if (next <= v) continue;
                const double GR = G - GL, HR = H - HL;
                if (HL < p.min_child_weight || HR < p.min_child_weight) continue;
                const double gain = 0.5 * (score(GL, HL) + score(GR, HR) - score(G, H));
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_f = static_cast<int>(f);
                    best_t = 0.5 * (v + next);
                    if (best_t <= v) best_t = next;
                }
            }
        }
        if (best_f < 0) return id;
        std::vector<std::size_t> left, right;
        for (auto r : rows) (x(static_cast<Eigen::Index>(r), best_f) < best_t ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int rr = grow(std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_f;
        node.threshold = best_t;
        node.left = l;
        node.right = rr;
        node.gain = best_gain;
        node.value = 0.0;
        return id;
    }
};

}  // namespace

double weighted_log_loss(const std::vector<int>& y, const std::vector<double>& margin, double scale_pos_weight) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double w = y[i] == 1 ? scale_pos_weight : 1.0;
        num += w * (y[i] == 1 ? softplus(-margin[i]) : softplus(margin[i]));
        den += w;
    }
    return den > 0.0 ? num / den : 0.0;
}

GradientBoosting GradientBoosting::fit(const Matrix& x, const std::vector<int>& y, const BoostParams& params) {
    params.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ContractError("row and label counts differ");
    const auto pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const auto neg = static_cast<double>(y.size()) - pos;
    if (pos == 0.0 || neg == 0.0) throw StrategyError("boosting needs both classes");

    GradientBoosting m;
    m.params_ = params;
    m.width_ = static_cast<std::size_t>(x.cols());
    m.base_ = std::log(params.scale_pos_weight * pos / neg);

    const std::size_t n = y.size();
    std::vector<double> margin(n, m.base_), g(n), h(n);
    m.loss_curve_.push_back(weighted_log_loss(y, margin, params.scale_pos_weight));
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});

    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double w = y[i] == 1 ? params.scale_pos_weight : 1.0;
            const double p = sigmoid(margin[i]);
            g[i] = w * (p - y[i]);
            h[i] = w * std::max(p * (1.0 - p), 1e-16);
        }
        TreeGrower grower{x, g, h, params, {}};
        grower.grow(all, 0);
        for (auto& node : grower.tree.nodes) node.value *= params.learning_rate;
        for (std::size_t i = 0; i < n; ++i) margin[i] += grower.tree.predict(x.row(static_cast<Eigen::Index>(i)));
        m.trees_.push_back(std::move(grower.tree));
        m.loss_curve_.push_back(weighted_log_loss(y, margin, params.scale_pos_weight));
    }
    return m;
}

std::vector<double> GradientBoosting::margin(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != width_) throw ContractError("input width does not match the booster");
    std::vector<double> out(static_cast<std::size_t>(x.rows()), base_);
    for (const auto& t : trees_)
        for (Eigen::Index r = 0; r < x.rows(); ++r) out[static_cast<std::size_t>(r)] += t.predict(x.row(r));
    return out;
}

std::vector<double> GradientBoosting::predict_proba(const Matrix& x) const {
    auto out = margin(x);
    for (auto& v : out) v = sigmoid(v);
    return out;
}

std::vector<double> GradientBoosting::importance() const {
    std::vector<double> out(width_, 0.0);
    for (const auto& t : trees_)
        for (const auto& n : t.nodes)
            if (n.feature >= 0) out[static_cast<std::size_t>(n.feature)] += n.gain;
    const double s = std::accumulate(out.begin(), out.end(), 0.0);
    if (s > 0.0)
        for (auto& v : out) v /= s;
    return out;
}

nlohmann::json GradientBoosting::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) {
        nlohmann::json jt = nlohmann::json::array();
        for (const auto& n : t.nodes) jt.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain});
        trees.push_back(jt);
    }
    return {{"params",
             {{"learning_rate", params_.learning_rate},
              {"n_rounds", params_.n_rounds},
              {"max_depth", params_.max_depth},
              {"scale_pos_weight", params_.scale_pos_weight},
              {"lambda", params_.lambda},
              {"min_child_weight", params_.min_child_weight},
              {"seed", params_.seed}}},
            {"width", width_},
            {"base", base_},
            {"loss_curve", loss_curve_},
            {"trees", trees}};
}

GradientBoosting GradientBoosting::from_json(const nlohmann::json& j) {
    GradientBoosting m;
    const auto& p = j.at("params");
    m.params_.learning_rate = p.at("learning_rate").get<double>();
    m.params_.n_rounds = p.at("n_rounds").get<std::size_t>();
    m.params_.max_depth = p.at("max_depth").get<int>();
    m.params_.scale_pos_weight = p.at("scale_pos_weight").get<double>();
    m.params_.lambda = p.at("lambda").get<double>();
    m.params_.min_child_weight = p.at("min_child_weight").get<double>();
    m.params_.seed = p.at("seed").get<Seed>();
    m.width_ = j.at("width").get<std::size_t>();
    m.base_ = j.at("base").get<double>();
    m.loss_curve_ = j.at("loss_curve").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
        RegressionTree t;
        for (const auto& jn : jt)
            t.nodes.push_back({jn.at(0).get<int>(), jn.at(1).get<double>(), jn.at(2).get<int>(), jn.at(3).get<int>(),
                               jn.at(4).get<double>(), jn.at(5).get<double>()});
        m.trees_.push_back(std::move(t));
    }
    return m;
}

}  // namespace stinger
