#include "stinger/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "stinger/error.hpp"
#include "stinger/metrics.hpp"

namespace stinger {

namespace {

constexpr const char* kFormat = "stinger-model";
constexpr int kVersion = 1;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<int> threshold(const std::vector<double>& scores) {
    std::vector<int> out(scores.size());
    std::transform(scores.begin(), scores.end(), out.begin(), [](double s) { return s >= 0.5 ? 1 : 0; });
    return out;
}

std::vector<double> normalized(std::vector<double> v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (s > 0.0)
        for (auto& x : v) x /= s;
    return v;
}

template <class T>
void set_if(const nlohmann::json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& section) {
    if (!j.is_object()) throw ParameterError("'" + section + "' parameters must be an object");
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
            throw ParameterError("unknown " + section + " parameter '" + k + "'");
    }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::mlp: return "mlp";
        case ModelKind::forest: return "forest";
        case ModelKind::boost: return "boost";
        case ModelKind::ocsvm: return "ocsvm";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "mlp") return ModelKind::mlp;
    if (text == "forest") return ModelKind::forest;
    if (text == "boost") return ModelKind::boost;
    if (text == "ocsvm") return ModelKind::ocsvm;
    throw ParameterError("unknown model '" + std::string(text) + "' (expected mlp, forest, boost or ocsvm)");
}

void ModelParams::apply_overrides(const nlohmann::json& sections) {
    if (sections.is_null()) return;
    check_keys(sections, {"mlp", "forest", "boost", "ocsvm"}, "model");
    try {
        if (sections.contains("mlp")) {
            const auto& j = sections["mlp"];
            check_keys(j, {"hidden_units", "max_epochs", "learning_rate", "l2_alpha", "batch_size"}, "mlp");
            set_if(j, "hidden_units", mlp.hidden_units);
            set_if(j, "max_epochs", mlp.max_epochs);
            set_if(j, "learning_rate", mlp.learning_rate);
            set_if(j, "l2_alpha", mlp.l2_alpha);
            set_if(j, "batch_size", mlp.batch_size);
            mlp.validate();
        }
        if (sections.contains("forest")) {
            const auto& j = sections["forest"];
            check_keys(j,
                       {"n_trees", "bootstrap", "max_depth", "min_samples_split", "min_samples_leaf", "max_leaf_nodes",
                        "max_features", "ccp_alpha"},
                       "forest");
            set_if(j, "n_trees", forest.n_trees);
            set_if(j, "bootstrap", forest.bootstrap);
            set_if(j, "max_depth", forest.max_depth);
            set_if(j, "min_samples_split", forest.min_samples_split);
            set_if(j, "min_samples_leaf", forest.min_samples_leaf);
            set_if(j, "max_leaf_nodes", forest.max_leaf_nodes);
            set_if(j, "max_features", forest.max_features);
            set_if(j, "ccp_alpha", forest.ccp_alpha);
            forest.validate();
        }
        if (sections.contains("boost")) {
            const auto& j = sections["boost"];
            check_keys(j, {"learning_rate", "n_rounds", "max_depth", "scale_pos_weight", "lambda", "min_child_weight"},
                       "boost");
            set_if(j, "learning_rate", boost.learning_rate);
            set_if(j, "n_rounds", boost.n_rounds);
            set_if(j, "max_depth", boost.max_depth);
            set_if(j, "scale_pos_weight", boost.scale_pos_weight);
            set_if(j, "lambda", boost.lambda);
            set_if(j, "min_child_weight", boost.min_child_weight);
            boost.validate();
        }
        if (sections.contains("ocsvm")) {
            const auto& j = sections["ocsvm"];
            check_keys(j, {"nu", "gamma", "tolerance", "max_iterations"}, "ocsvm");
            set_if(j, "nu", ocsvm.nu);
            set_if(j, "gamma", ocsvm.gamma);
            set_if(j, "tolerance", ocsvm.tolerance);
            set_if(j, "max_iterations", ocsvm.max_iterations);
            ocsvm.validate();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("bad model parameter: ") + e.what());
    }
}

void ModelParams::set_seed(Seed seed) {
    mlp.seed = seed;
    forest.seed = seed;
    boost.seed = seed;
}

TrainedModel::TrainedModel(Variant model, Encoder encoder) : model_(std::move(model)), encoder_(std::move(encoder)) {}

ModelKind TrainedModel::kind() const {
    return std::visit(overloaded{[](const Mlp&) { return ModelKind::mlp; },
                                 [](const RandomForest&) { return ModelKind::forest; },
                                 [](const GradientBoosting&) { return ModelKind::boost; },
                                 [](const OneClassSvm&) { return ModelKind::ocsvm; }},
                      model_);
}

Prediction TrainedModel::predict(const Dataset& data) const {
    if (data.empty()) return {};
    return predict_encoded(encoder_.transform(data));
}

Prediction TrainedModel::predict_encoded(const Matrix& x) const {
    if (x.rows() == 0) return {};
    if (static_cast<std::size_t>(x.cols()) != encoder_.width())
        throw ContractError("encoded width does not match the model");
    Prediction p;
    p.scores = std::visit(overloaded{[&](const Mlp& m) {
                                         const Matrix pr = m.predict_proba(x);
                                         std::vector<double> s(static_cast<std::size_t>(pr.rows()));
                                         for (Eigen::Index r = 0; r < pr.rows(); ++r) s[static_cast<std::size_t>(r)] = pr(r, 1);
                                         return s;
                                     },
                                     [&](const RandomForest& m) { return m.predict_proba(x); },
                                     [&](const GradientBoosting& m) { return m.predict_proba(x); },
                                     [&](const OneClassSvm& m) { return m.predict_proba(x); }},
                          model_);
    p.labels = threshold(p.scores);
    return p;
}

std::optional<std::vector<double>> TrainedModel::importance() const {
    if (const auto* f = std::get_if<RandomForest>(&model_)) return normalized(encoder_.aggregate(f->importance()));
    if (const auto* b = std::get_if<GradientBoosting>(&model_)) return normalized(encoder_.aggregate(b->importance()));
    return std::nullopt;
}

std::vector<double> TrainedModel::feature_importance(const Dataset& validation, Seed seed) const {
    if (auto imp = importance()) return *imp;
    return permutation_importance(*this, validation, seed);
}

std::vector<double> permutation_importance(const TrainedModel& model, const Dataset& validation, Seed seed,
                                           std::size_t repeats) {
    if (validation.empty()) throw InputError("permutation importance needs validation rows");
    const auto& y = validation.labels();
    const bool both = validation.count(1) > 0 && validation.count(0) > 0;
    auto score = [&](const Dataset& d) {
        const auto p = model.predict(d);
        if (both) return *roc_auc(y, p.scores);
        return accuracy(confusion_matrix(y, p.labels));
    };
    const double base = score(validation);
    const auto width = validation.schema().size();
    std::vector<double> out(width, 0.0);
    std::mt19937_64 rng(seed);
    for (std::size_t f = 0; f < width; ++f) {
        double drop = 0.0;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            Matrix cells = validation.cells();
            std::vector<Eigen::Index> perm(static_cast<std::size_t>(cells.rows()));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            const Eigen::VectorXd col = cells.col(static_cast<Eigen::Index>(f));
            for (Eigen::Index r = 0; r < cells.rows(); ++r)
                cells(r, static_cast<Eigen::Index>(f)) = col[perm[static_cast<std::size_t>(r)]];
            Dataset shuffled(validation.schema(), std::move(cells), y);
            drop += base - score(shuffled);
        }
        out[f] = std::max(0.0, drop / static_cast<double>(repeats));
    }
    return normalized(out);
}

nlohmann::json TrainedModel::to_json() const {
    nlohmann::json body = std::visit(overloaded{[](const Mlp& m) { return m.to_json(); },
                                                [](const RandomForest& m) { return m.to_json(); },
                                                [](const GradientBoosting& m) { return m.to_json(); },
                                                [](const OneClassSvm& m) { return m.to_json(); }},
                                     model_);
    return {{"format", kFormat},
            {"version", kVersion},
            {"kind", std::string(to_string(kind()))},
            {"encoder", encoder_.to_json()},
            {"model", body}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kFormat) throw InputError("not a stinger model document");
        if (j.at("version").get<int>() != kVersion) throw InputError("unsupported model version");
        const auto kind = parse_model_kind(j.at("kind").get<std::string>());
        Encoder enc = Encoder::from_json(j.at("encoder"));
        const auto& body = j.at("model");
        switch (kind) {
            case ModelKind::mlp: return {Mlp::from_json(body), enc};
            case ModelKind::forest: return {RandomForest::from_json(body), enc};
            case ModelKind::boost: return {GradientBoosting::from_json(body), enc};
            case ModelKind::ocsvm: return {OneClassSvm::from_json(body), enc};
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
    throw InputError("malformed model document");
}

void TrainedModel::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump() << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("model file is not JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

namespace {

void require_both(const Dataset& train, const char* what) {
    if (train.count(1) == 0 || train.count(0) == 0)
        throw StrategyError(std::string(what) + " training needs both classes");
}

}  // namespace

TrainedModel train_mlp(const Dataset& train, const MlpParams& params, Encoding encoding) {
    require_both(train, "MLP");
    if (train.size() < 2) throw DataError("MLP training needs at least 2 rows");
    Encoder enc = Encoder::fit(train, encoding);
    return {Mlp::fit(enc.transform(train), train.labels(), params), enc};
}

TrainedModel train_forest(const Dataset& train, const ForestParams& params, Encoding encoding, unsigned threads) {
    require_both(train, "forest");
    Encoder enc = Encoder::fit(train, encoding);
    return {RandomForest::fit(enc.transform(train), train.labels(), params, threads), enc};
}

TrainedModel train_boost(const Dataset& train, const BoostParams& params, Encoding encoding) {
    require_both(train, "boosting");
    Encoder enc = Encoder::fit(train, encoding);
    return {GradientBoosting::fit(enc.transform(train), train.labels(), params), enc};
}

TrainedModel train_ocsvm(const Dataset& positives, const OcsvmParams& params, Encoding encoding,
                         const std::function<void(const std::string&)>& warn) {
    const Dataset pos = positives.count(0) > 0 ? positives.filter_label(1) : positives;
    if (pos.size() < 2) throw DataError("one-class SVM needs at least 2 positive rows");
    Encoder enc = Encoder::fit(pos, encoding);
    return {OneClassSvm::fit(enc.transform(pos), params, warn), enc};
}

TrainedModel train_model(ModelKind kind, const Dataset& train, const ModelParams& params, Encoding encoding,
                         const std::function<void(const std::string&)>& warn) {
    switch (kind) {
        case ModelKind::mlp: return train_mlp(train, params.mlp, encoding);
        case ModelKind::forest: return train_forest(train, params.forest, encoding, params.threads);
        case ModelKind::boost: return train_boost(train, params.boost, encoding);
        case ModelKind::ocsvm: return train_ocsvm(train, params.ocsvm, encoding, warn);
    }
    throw ParameterError("unknown model kind");
}

}  // namespace stinger
