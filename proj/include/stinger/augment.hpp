#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stinger/circular.hpp"
#include "stinger/nn.hpp"
#include "stinger/schema.hpp"

namespace stinger {

// ---- SMOTE-NC ---------------------------------------------------------------

struct SmoteParams {
    std::size_t k_neighbors = 5;
    Seed seed = 0;
};

struct SmoteResult {
    Dataset data;  // originals first, in input order, then synthetic rows
    // per synthetic row: (base row, neighbour row) indices into the input
    std::vector<std::pair<std::size_t, std::size_t>> parents;
    std::vector<double> gaps;  // interpolation fraction per synthetic row
};

/// Oversamples the minority class to parity. Continuous cells interpolate
/// linearly, circular cells along the shorter arc, discrete cells take the
/// most frequent value among the k neighbours.
SmoteResult smote_nc_detailed(const Dataset& train, const SmoteParams& params);
Dataset smote_nc(const Dataset& train, const SmoteParams& params);

// ---- undersampling ----------------------------------------------------------

struct UndersampleResult {
    Dataset data;
    std::vector<std::size_t> source_rows;  // input row behind each output row
};

UndersampleResult random_undersample_detailed(const Dataset& train, Seed seed);
Dataset random_undersample(const Dataset& train, Seed seed);

// ---- Gaussian-copula negative model -----------------------------------------

struct EmpiricalMarginal {
    std::vector<double> sorted;

    bool degenerate() const { return sorted.empty() || sorted.front() == sorted.back(); }
    double min() const { return sorted.front(); }
    double max() const { return sorted.back(); }
    /// Linear interpolation between order statistics, u in [0, 1].
    double quantile(double u) const;
};

struct CopulaNegativeModel {
    FeatureSchema schema;
    std::vector<std::size_t> continuous;  // schema indices
    std::vector<EmpiricalMarginal> marginals;
    Matrix correlation;  // of the continuous normal scores
    std::vector<std::size_t> circular;
    std::vector<circular::VonMisesMixture> mixtures;
    std::vector<std::size_t> discrete;
    std::vector<std::vector<double>> frequencies;  // per discrete feature, by code
};

/// Normal scores Phi^-1(rank / (n + 1)) with mid-ranks for ties.
std::vector<double> normal_scores(std::span<const double> values);
double normal_cdf(double z);
double normal_quantile(double p);

CopulaNegativeModel fit_copula_negative_model(const Dataset& negatives);
/// `n` rows labelled 0 with synthetic origin.
Dataset sample_synthetic_negatives(const CopulaNegativeModel& model, std::size_t n, Seed seed);

// ---- tabular GAN ------------------------------------------------------------

struct GanParams {
    std::size_t latent_dim = 16;
    std::vector<std::size_t> generator_hidden = {64, 64};
    std::vector<std::size_t> discriminator_hidden = {64, 64};
    int epochs = 300;
    std::size_t batch_size = 64;
    double learning_rate = 2e-4;
    Seed seed = 0;

    void validate() const;
};

/// Column layout of the GAN's data space: standardized continuous values,
/// (sin, cos) per circular feature, one-hot blocks for discrete features.
struct GanCodec {
    struct Block {
        std::size_t feature = 0;
        FeatureKind kind = FeatureKind::continuous;
        std::size_t offset = 0;
        std::size_t width = 0;
        double mean = 0.0, scale = 1.0;
    };
    FeatureSchema schema;
    std::vector<Block> blocks;
    std::size_t width = 0;
    std::vector<std::size_t> discrete_blocks;  // indices into blocks
    std::size_t condition_width = 0;
    std::vector<std::size_t> condition_offset;  // per discrete block

    static GanCodec fit(const Dataset& data);
    Matrix encode(const Dataset& data) const;
    Matrix decode_cells(const Matrix& encoded) const;
};

struct TabularGan {
    GanParams params;
    GanCodec codec;
    nn::Network generator;
    nn::Network discriminator;
    // empirical category frequencies used to draw conditions at sampling time
    std::vector<std::vector<double>> frequencies;
    std::vector<double> generator_loss;      // per epoch, mean over steps
    std::vector<double> discriminator_loss;  // per epoch

    Dataset sample(std::size_t n, Seed seed) const;
};

/// Adversarial training with the non-saturating generator loss. Discrete
/// features drive a conditional vector (training-by-sampling).
TabularGan train_tabular_gan(const Dataset& negatives, const GanParams& params);

// ---- synthetic negative approach --------------------------------------------

using NegativeSampler = std::function<Dataset(std::size_t n, Seed seed)>;

/// All real positives (label 1) plus an equal number of generated rows
/// (label 0), shuffled. No real negative survives.
Dataset build_synthetic_negative_dataset(const Dataset& positives, const NegativeSampler& sampler, Seed seed);
Dataset build_synthetic_negative_dataset(const Dataset& positives, const CopulaNegativeModel& model, Seed seed);
Dataset build_synthetic_negative_dataset(const Dataset& positives, const TabularGan& gan, Seed seed);

// ---- resampling plans -------------------------------------------------------

enum class Strategy { none, smote_nc, undersample, synthetic_negative };
enum class NegativeBackend { copula, gan };

struct ResamplePlan {
    Strategy strategy = Strategy::none;
    std::optional<NegativeBackend> backend;  // synthetic_negative only
    SmoteParams smote;
    GanParams gan;
    Seed seed = 0;

    /// none | smote | undersample | synthneg-copula | synthneg-gan
    static ResamplePlan parse(std::string_view name);
    std::string name() const;
    void validate() const;
};

/// Applies the plan to a training split.
Dataset apply_plan(const Dataset& train, const ResamplePlan& plan);

}  // namespace stinger
