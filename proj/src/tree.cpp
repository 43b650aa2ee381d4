#include "stinger/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "stinger/error.hpp"

namespace stinger {

void TreeParams::validate() const {
    if (max_depth == 0) throw ParameterError("max_depth must be at least 1");
    if (min_samples_leaf < 1) throw ParameterError("min_samples_leaf must be at least 1");
    if (min_samples_split < 2) throw ParameterError("min_samples_split must be at least 2");
    if (min_samples_leaf > min_samples_split) throw ParameterError("min_samples_leaf exceeds min_samples_split");
    if (max_leaf_nodes == 1) throw ParameterError("max_leaf_nodes must be at least 2");
    if (ccp_alpha < 0.0 || std::isnan(ccp_alpha)) throw ParameterError("ccp_alpha must be non-negative");
}

double gini(double positives, double total) {
    if (total <= 0.0) return 0.0;
    const double p = positives / total;
    return 2.0 * p * (1.0 - p);
}

namespace {

constexpr double kFeatureTolerance = 1e-7;

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double improvement = 0.0;  // weighted impurity decrease, relative to the root
};

struct Builder {
    const Matrix& x;
    const std::vector<int>& y;
    const TreeParams& params;
    std::mt19937_64* rng;
    double root_samples = 0.0;
    std::vector<TreeNode> nodes;
    std::vector<std::vector<std::size_t>> members;  // rows per node while growing

    Split best_split(const TreeNode& node, const std::vector<std::size_t>& rows) {
        Split best;
        if (params.max_depth >= 0 && node.depth >= params.max_depth) return best;
        if (rows.size() < params.min_samples_split || rows.size() < 2 * params.min_samples_leaf) return best;
        if (node.impurity <= 1e-12) return best;

        const auto width = static_cast<std::size_t>(x.cols());
        std::vector<std::size_t> features(width);
        std::iota(features.begin(), features.end(), std::size_t{0});
        const bool subsample = params.max_features > 0 && params.max_features < width;
        if (subsample) std::shuffle(features.begin(), features.end(), *rng);
        const std::size_t budget = subsample ? params.max_features : width;

        std::vector<std::pair<double, int>> sorted(rows.size());
        double best_child = std::numeric_limits<double>::infinity();
        std::size_t evaluated = 0;
        for (std::size_t f : features) {
            if (evaluated >= budget) break;
            for (std::size_t i = 0; i < rows.size(); ++i)
                sorted[i] = {x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), y[rows[i]]};
            std::sort(sorted.begin(), sorted.end());
            if (sorted.back().first <= sorted.front().first + kFeatureTolerance) continue;  // constant here
            ++evaluated;

            const double n = static_cast<double>(rows.size());
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                left_pos += sorted[i].second;
                const auto n_left = i + 1;
                if (sorted[i + 1].first <= sorted[i].first + kFeatureTolerance) continue;
                if (n_left < params.min_samples_leaf || rows.size() - n_left < params.min_samples_leaf) continue;
                const double nl = static_cast<double>(n_left), nr = n - nl;
                const double child = nl * gini(left_pos, nl) + nr * gini(node.positives - left_pos, nr);
                if (child < best_child) {
                    best_child = child;
                    best.feature = static_cast<int>(f);
                    double t = 0.5 * (sorted[i].first + sorted[i + 1].first);
                    if (t >= sorted[i + 1].first) t = sorted[i].first;
                    best.threshold = t;
                }
            }
        }
        if (best.feature >= 0)
            best.improvement = (node.samples * node.impurity - best_child) / root_samples;
        return best;
    }

    int make_node(std::vector<std::size_t> rows, int depth) {
        TreeNode node;
        node.depth = depth;
        node.samples = static_cast<double>(rows.size());
        for (auto r : rows) node.positives += y[r];
        node.impurity = gini(node.positives, node.samples);
        nodes.push_back(node);
        members.push_back(std::move(rows));
        return static_cast<int>(nodes.size()) - 1;
    }
};

}  // namespace

DecisionTree DecisionTree::fit(const Matrix& x, const std::vector<int>& y, const TreeParams& params,
                               std::mt19937_64* rng) {
    std::vector<std::size_t> rows(y.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_rows(x, y, rows, params, rng);
}

DecisionTree DecisionTree::fit_rows(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                                    const TreeParams& params, std::mt19937_64* rng) {
    params.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ContractError("row and label counts differ");
    if (rows.empty()) throw DataError("cannot grow a tree on zero rows");
    if (params.max_features > 0 && params.max_features < static_cast<std::size_t>(x.cols()) && !rng)
        throw ParameterError("feature subsampling needs a random stream");

    Builder b{x, y, params, rng, 0.0, {}, {}};
    b.root_samples = static_cast<double>(rows.size());
    b.make_node(rows, 0);

    // frontier ordered by improvement, ties broken by creation order
    using Entry = std::tuple<double, int, Split>;
    auto cmp = [](const Entry& a, const Entry& c) {
        if (std::get<0>(a) != std::get<0>(c)) return std::get<0>(a) < std::get<0>(c);
        return std::get<1>(a) > std::get<1>(c);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> frontier(cmp);
    auto consider = [&](int id) {
        const Split s = b.best_split(b.nodes[static_cast<std::size_t>(id)], b.members[static_cast<std::size_t>(id)]);
        if (s.feature >= 0) frontier.emplace(s.improvement, id, s);
    };
    consider(0);

    std::size_t leaves = 1;
    while (!frontier.empty()) {
        if (params.max_leaf_nodes > 0 && leaves >= params.max_leaf_nodes) break;
        const auto [gain, id, split] = frontier.top();
        frontier.pop();
        const auto uid = static_cast<std::size_t>(id);
        std::vector<std::size_t> left, right;
        for (auto r : b.members[uid])
            (x(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
        b.members[uid].clear();
        const int depth = b.nodes[uid].depth + 1;
        const int l = b.make_node(std::move(left), depth);
        const int r = b.make_node(std::move(right), depth);
        auto& node = b.nodes[uid];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        ++leaves;
        consider(l);
        consider(r);
    }

    DecisionTree tree;
    tree.nodes_ = std::move(b.nodes);
    if (params.ccp_alpha > 0.0) tree.prune(params.ccp_alpha);
    tree.compact();
    return tree;
}

void DecisionTree::prune(double alpha) {
    if (nodes_.empty()) return;
    const double total = nodes_.front().samples;
    for (;;) {
        // subtree risk and leaf count, children before parents
        std::vector<double> risk(nodes_.size(), 0.0);
        std::vector<double> leaves(nodes_.size(), 0.0);
        std::vector<int> order;
        std::vector<int> stack = {0};
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            order.push_back(id);
            const auto& n = nodes_[static_cast<std::size_t>(id)];
            if (!n.is_leaf()) {
                stack.push_back(n.left);
                stack.push_back(n.right);
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto id = static_cast<std::size_t>(*it);
            const auto& n = nodes_[id];
            if (n.is_leaf()) {
                risk[id] = n.samples * n.impurity / total;
                leaves[id] = 1.0;
            } else {
                risk[id] = risk[static_cast<std::size_t>(n.left)] + risk[static_cast<std::size_t>(n.right)];
                leaves[id] = leaves[static_cast<std::size_t>(n.left)] + leaves[static_cast<std::size_t>(n.right)];
            }
        }
        int weakest = -1;
        double weakest_alpha = std::numeric_limits<double>::infinity();
        for (int id : order) {
            const auto& n = nodes_[static_cast<std::size_t>(id)];
            if (n.is_leaf()) continue;
            const auto uid = static_cast<std::size_t>(id);
            const double g = (n.samples * n.impurity / total - risk[uid]) / (leaves[uid] - 1.0);
            if (g < weakest_alpha) {
                weakest_alpha = g;
                weakest = id;
            }
        }
        if (weakest < 0 || weakest_alpha > alpha) break;
        auto& n = nodes_[static_cast<std::size_t>(weakest)];
        n.feature = -1;
        n.left = n.right = -1;
    }
    compact();
}

void DecisionTree::compact() {
    if (nodes_.empty()) return;
    std::vector<TreeNode> out;
    // breadth-first renumbering of the reachable nodes
    std::vector<int> queue = {0};
    std::vector<int> new_id(nodes_.size(), -1);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto old = static_cast<std::size_t>(queue[head]);
        new_id[old] = static_cast<int>(out.size());
        out.push_back(nodes_[old]);
        if (!nodes_[old].is_leaf()) {
            queue.push_back(nodes_[old].left);
            queue.push_back(nodes_[old].right);
        }
    }
    for (auto& n : out) {
        if (n.is_leaf()) continue;
        n.left = new_id[static_cast<std::size_t>(n.left)];
        n.right = new_id[static_cast<std::size_t>(n.right)];
    }
    nodes_ = std::move(out);
}

int DecisionTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int id = 0;
    while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        id = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return id;
}

double DecisionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return nodes_[static_cast<std::size_t>(leaf_index(row))].presence_fraction();
}

std::vector<double> DecisionTree::predict_proba(const Matrix& x) const {
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[static_cast<std::size_t>(r)] = predict_row(x.row(r));
    return out;
}

std::vector<double> DecisionTree::impurity_decrease(std::size_t width) const {
    std::vector<double> out(width, 0.0);
    if (nodes_.empty()) return out;
    const double total = nodes_.front().samples;
    for (const auto& n : nodes_) {
        if (n.is_leaf()) continue;
        const auto& l = nodes_[static_cast<std::size_t>(n.left)];
        const auto& r = nodes_[static_cast<std::size_t>(n.right)];
        out.at(static_cast<std::size_t>(n.feature)) +=
            (n.samples * n.impurity - l.samples * l.impurity - r.samples * r.impurity) / total;
    }
    return out;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
}

nlohmann::json DecisionTree::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& n : nodes_) {
        out.push_back({n.feature, n.threshold, n.left, n.right, n.depth, n.samples, n.positives, n.impurity});
    }
    return out;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
    DecisionTree t;
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        n.threshold = jn.at(1).get<double>();
        n.left = jn.at(2).get<int>();
        n.right = jn.at(3).get<int>();
        n.depth = jn.at(4).get<int>();
        n.samples = jn.at(5).get<double>();
        n.positives = jn.at(6).get<double>();
        n.impurity = jn.at(7).get<double>();
        t.nodes_.push_back(n);
    }
    return t;
}

}  // namespace stinger
