#include <algorithm>
#include <numeric>
#include <random>

#include "stinger/augment.hpp"
#include "stinger/error.hpp"

namespace stinger {

Dataset build_synthetic_negative_dataset(const Dataset& positives, const NegativeSampler& sampler, Seed seed) {
    if (positives.empty()) throw DataError("no positive rows to pair with synthetic negatives");
    const Dataset real = positives.filter_label(1);
    if (real.size() != positives.size()) throw LabelError("positives must all carry label 1");

    // generation and shuffling draw from separate streams derived from the seed
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5e9u};
    std::mt19937_64 rng(seq);
    const Seed sample_seed = rng();
    Dataset generated = sampler(real.size(), sample_seed);
    if (generated.size() != real.size() || !(generated.schema() == real.schema()))
        throw ContractError("generator returned a table of the wrong shape");
    generated = Dataset(generated.schema(), generated.cells(), std::vector<int>(generated.size(), 0), {}, {},
                        std::vector<Origin>(generated.size(), Origin::synthetic));

    // beach and date columns do not survive: generated rows have neither
    const Dataset stripped(real.schema(), real.cells(), real.labels(), {}, {}, real.origins());
    const Dataset combined = Dataset::concat(stripped, generated);
    std::vector<std::size_t> order(combined.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    return combined.subset(order);
}

Dataset build_synthetic_negative_dataset(const Dataset& positives, const CopulaNegativeModel& model, Seed seed) {
    return build_synthetic_negative_dataset(
        positives, [&](std::size_t n, Seed s) { return sample_synthetic_negatives(model, n, s); }, seed);
}

Dataset build_synthetic_negative_dataset(const Dataset& positives, const TabularGan& gan, Seed seed) {
    return build_synthetic_negative_dataset(positives, [&](std::size_t n, Seed s) { return gan.sample(n, s); }, seed);
}

// ---- plans -----------------------------------------------------------------

ResamplePlan ResamplePlan::parse(std::string_view name) {
    ResamplePlan plan;
    if (name == "none") {
        plan.strategy = Strategy::none;
    } else if (name == "smote" || name == "smote-nc" || name == "smote_nc") {
        plan.strategy = Strategy::smote_nc;
    } else if (name == "undersample") {
        plan.strategy = Strategy::undersample;
    } else if (name == "synthneg-copula") {
        plan.strategy = Strategy::synthetic_negative;
        plan.backend = NegativeBackend::copula;
    } else if (name == "synthneg-gan") {
        plan.strategy = Strategy::synthetic_negative;
        plan.backend = NegativeBackend::gan;
    } else {
        throw ParameterError("unknown strategy '" + std::string(name) + "'");
    }
    return plan;
}

std::string ResamplePlan::name() const {
    switch (strategy) {
        case Strategy::none: return "none";
        case Strategy::smote_nc: return "smote";
        case Strategy::undersample: return "undersample";
        case Strategy::synthetic_negative:
            return backend == NegativeBackend::gan ? "synthneg-gan" : "synthneg-copula";
    }
    return "none";
}

void ResamplePlan::validate() const {
    if ((strategy == Strategy::synthetic_negative) != backend.has_value())
        throw ParameterError("a generator backend is required exactly for the synthetic-negative strategy");
    if (strategy == Strategy::synthetic_negative && backend == NegativeBackend::gan) gan.validate();
}

Dataset apply_plan(const Dataset& train, const ResamplePlan& plan) {
    plan.validate();
    switch (plan.strategy) {
        case Strategy::none: return train;
        case Strategy::smote_nc: {
            SmoteParams p = plan.smote;
            p.seed = plan.seed;
            return smote_nc(train, p);
        }
        case Strategy::undersample: return random_undersample(train, plan.seed);
        case Strategy::synthetic_negative: {
            const Dataset negatives = train.filter_label(0);
            const Dataset positives = train.filter_label(1);
            if (positives.empty() || negatives.empty())
                throw StrategyError("synthetic negatives need both classes in the training data");
            if (plan.backend == NegativeBackend::gan) {
                GanParams p = plan.gan;
                p.seed = plan.seed;
                return build_synthetic_negative_dataset(positives, train_tabular_gan(negatives, p), plan.seed);
            }
            return build_synthetic_negative_dataset(positives, fit_copula_negative_model(negatives), plan.seed);
        }
    }
    return train;
}

}  // namespace stinger
