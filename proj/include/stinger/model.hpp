#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stinger/boost.hpp"
#include "stinger/encoding.hpp"
#include "stinger/forest.hpp"
#include "stinger/mlp.hpp"
#include "stinger/ocsvm.hpp"

namespace stinger {

enum class ModelKind { mlp, forest, boost, ocsvm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelParams {
    MlpParams mlp;
    ForestParams forest;
    BoostParams boost;
    OcsvmParams ocsvm;
    unsigned threads = 1;  // forest tree growth

    /// Applies "mlp"/"forest"/"boost"/"ocsvm" sections; unknown keys raise.
    void apply_overrides(const nlohmann::json& sections);
    void set_seed(Seed seed);
};

struct Prediction {
    std::vector<double> scores;  // presence score in [0, 1]
    std::vector<int> labels;     // score >= 0.5
};

class TrainedModel {
public:
    using Variant = std::variant<Mlp, RandomForest, GradientBoosting, OneClassSvm>;

    TrainedModel() = default;
    TrainedModel(Variant model, Encoder encoder);

    ModelKind kind() const;
    const Encoder& encoder() const { return encoder_; }
    const Variant& model() const { return model_; }

    Prediction predict(const Dataset& data) const;
    Prediction predict_encoded(const Matrix& x) const;

    /// Built-in importance (forest, boost) aggregated to source features.
    std::optional<std::vector<double>> importance() const;
    /// Built-in importance when available, otherwise permutation importance
    /// on `validation`.
    std::vector<double> feature_importance(const Dataset& validation, Seed seed = 0) const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);

private:
    Variant model_;
    Encoder encoder_;
};

/// Fits the encoder on `train` and the chosen model on its encoding. The
/// one-class SVM sees only the positive rows.
TrainedModel train_model(ModelKind kind, const Dataset& train, const ModelParams& params,
                         Encoding encoding = Encoding::raw,
                         const std::function<void(const std::string&)>& warn = {});

TrainedModel train_mlp(const Dataset& train, const MlpParams& params, Encoding encoding = Encoding::raw);
TrainedModel train_forest(const Dataset& train, const ForestParams& params, Encoding encoding = Encoding::raw,
                          unsigned threads = 1);
TrainedModel train_boost(const Dataset& train, const BoostParams& params, Encoding encoding = Encoding::raw);
TrainedModel train_ocsvm(const Dataset& positives, const OcsvmParams& params, Encoding encoding = Encoding::raw,
                         const std::function<void(const std::string&)>& warn = {});

/// Mean drop in AUC (accuracy when the set has one class) after shuffling
/// each source feature, clipped at 0 and normalized to sum 1.
std::vector<double> permutation_importance(const TrainedModel& model, const Dataset& validation, Seed seed,
                                           std::size_t repeats = 5);

}  // namespace stinger
