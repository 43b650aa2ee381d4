#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stinger/augment.hpp"
#include "stinger/encoding.hpp"
#include "stinger/fixture.hpp"
#include "stinger/metrics.hpp"
#include "stinger/model.hpp"

namespace stinger {

struct ExperimentConfig {
    std::optional<std::filesystem::path> data;  // real observations; fixture otherwise
    FixtureSpec fixture;
    Encoding encoding = Encoding::raw;
    double split_fraction = 0.6;
    std::size_t runs = 30;
    std::vector<std::string> strategies = {"none", "synthneg-copula"};
    std::vector<ModelKind> models = {ModelKind::mlp, ModelKind::forest, ModelKind::boost, ModelKind::ocsvm};
    ModelParams params;
    SmoteParams smote;
    GanParams gan;
    std::filesystem::path out = "out";
    Seed seed = 0;
    unsigned jobs = 1;
    bool plots = true;

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

struct RunOutcome {
    std::size_t run = 0;
    Seed seed = 0;
    std::optional<EvaluationReport> train;
    std::optional<EvaluationReport> test;
    std::vector<double> importance;  // per source feature
    std::string error;               // non-empty when the run failed

    bool ok() const { return error.empty(); }
};

struct CellResult {
    std::string strategy;
    ModelKind model = ModelKind::forest;
    std::vector<RunOutcome> runs;

    std::size_t failures() const;
    /// Completed run with the highest test presence F1 (earliest on ties).
    const RunOutcome* best() const;
    RunAggregate aggregate_train() const;
    RunAggregate aggregate_test() const;
};

struct ExperimentResult {
    std::vector<std::string> feature_names;
    std::vector<CellResult> cells;  // strategies outer, models inner

    std::size_t failures() const;
    const CellResult* find(std::string_view strategy, ModelKind model) const;
};

using Progress = std::function<void(const std::string&)>;

/// Runs every (strategy, model) pair for runs 1..R with seed = master + r and
/// writes the report tree. Nothing is written when `write` is false.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write = true, const Progress& progress = {});

/// Loads the configured data (or generates the fixture).
Dataset experiment_data(const ExperimentConfig& config);

nlohmann::json to_json(const RunOutcome& outcome, const CellResult& cell, const std::vector<std::string>& names);
nlohmann::json aggregate_json(const CellResult& cell, const std::vector<std::string>& names);

}  // namespace stinger
