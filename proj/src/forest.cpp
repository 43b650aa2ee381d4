#include "stinger/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "stinger/error.hpp"

namespace stinger {

std::size_t log2_features(std::size_t width) {
    if (width <= 1) return 1;
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(width))));
}

void ForestParams::validate() const {
    if (n_trees < 1) throw ParameterError("n_trees must be at least 1");
    tree_params(1).validate();
}

TreeParams ForestParams::tree_params(std::size_t width) const {
    TreeParams t;
    t.max_depth = max_depth;
    t.min_samples_split = min_samples_split;
    t.min_samples_leaf = min_samples_leaf;
    t.max_leaf_nodes = max_leaf_nodes;
    t.max_features = max_features == 0 ? log2_features(width) : max_features;
    t.ccp_alpha = ccp_alpha;
    return t;
}

RandomForest RandomForest::fit(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                               unsigned threads) {
    params.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ContractError("row and label counts differ");
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<long>(y.size())) throw StrategyError("forest training needs both classes");

    RandomForest forest;
    forest.params_ = params;
    forest.width_ = static_cast<std::size_t>(x.cols());
    forest.trees_.resize(params.n_trees);
    const TreeParams tp = params.tree_params(forest.width_);

    auto grow = [&](std::size_t t) {
        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(seq);
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, y.size() - 1);
            std::vector<std::size_t> rows(y.size());
            for (auto& r : rows) r = pick(rng);
            forest.trees_[t] = DecisionTree::fit_rows(x, y, rows, tp, &rng);
        } else {
            forest.trees_[t] = DecisionTree::fit(x, y, tp, &rng);
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, params.n_trees));
    if (threads <= 1) {
        for (std::size_t t = 0; t < params.n_trees; ++t) grow(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t t; (t = next++) < params.n_trees;) grow(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return forest;
}

std::vector<double> RandomForest::predict_proba(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != width_) throw ContractError("input width does not match the forest");
    std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
    for (const auto& tree : trees_) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) out[static_cast<std::size_t>(r)] += tree.predict_row(x.row(r));
    }
    for (auto& v : out) v /= static_cast<double>(trees_.size());
    return out;
}

std::vector<int> RandomForest::predict(const Matrix& x) const {
    const auto p = predict_proba(x);
    std::vector<int> out(p.size());
    std::transform(p.begin(), p.end(), out.begin(), [](double v) { return v >= 0.5 ? 1 : 0; });
    return out;
}

std::vector<double> RandomForest::importance() const {
    std::vector<double> total(width_, 0.0);
    for (const auto& tree : trees_) {
        auto d = tree.impurity_decrease(width_);
        const double s = std::accumulate(d.begin(), d.end(), 0.0);
        if (s <= 0.0) continue;
        for (std::size_t j = 0; j < width_; ++j) total[j] += d[j] / s;
    }
    const double s = std::accumulate(total.begin(), total.end(), 0.0);
    if (s > 0.0)
        for (auto& v : total) v /= s;
    return total;
}

nlohmann::json RandomForest::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"params",
             {{"n_trees", params_.n_trees},
              {"bootstrap", params_.bootstrap},
              {"max_depth", params_.max_depth},
              {"min_samples_split", params_.min_samples_split},
              {"min_samples_leaf", params_.min_samples_leaf},
              {"max_leaf_nodes", params_.max_leaf_nodes},
              {"max_features", params_.max_features},
              {"ccp_alpha", std::isinf(params_.ccp_alpha) ? nlohmann::json("inf") : nlohmann::json(params_.ccp_alpha)},
              {"seed", params_.seed}}},
            {"width", width_},
            {"trees", trees}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
    RandomForest f;
    const auto& p = j.at("params");
    f.params_.n_trees = p.at("n_trees").get<std::size_t>();
    f.params_.bootstrap = p.at("bootstrap").get<bool>();
    f.params_.max_depth = p.at("max_depth").get<int>();
    f.params_.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    f.params_.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
    f.params_.max_leaf_nodes = p.at("max_leaf_nodes").get<std::size_t>();
    f.params_.max_features = p.at("max_features").get<std::size_t>();
    f.params_.ccp_alpha = p.at("ccp_alpha").is_string() ? std::numeric_limits<double>::infinity()
                                                         : p.at("ccp_alpha").get<double>();
    f.params_.seed = p.at("seed").get<Seed>();
    f.width_ = j.at("width").get<std::size_t>();
    for (const auto& t : j.at("trees")) f.trees_.push_back(DecisionTree::from_json(t));
    return f;
}

}  // namespace stinger
