#include "stinger/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "stinger/analysis.hpp"
#include "stinger/csv.hpp"
#include "stinger/error.hpp"

namespace stinger {

namespace {

template <class T>
void set_if(const nlohmann::json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
    if (runs < 1) throw ParameterError("run count must be at least 1");
    if (strategies.empty()) throw ParameterError("at least one strategy is required");
    if (models.empty()) throw ParameterError("at least one model is required");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ParameterError("split fraction must lie in (0, 1)");
    for (const auto& s : strategies) {
        auto plan = ResamplePlan::parse(s);
        plan.gan = gan;
        plan.validate();
    }
    if (data) {
        if (!std::filesystem::exists(*data)) throw InputError("data file not found: " + data->string());
    } else {
        fixture.validate();
    }
    if (jobs < 1) throw ParameterError("jobs must be at least 1");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base) {
    static const std::vector<std::string> known = {"data",   "fixture", "encoding", "split_fraction", "runs",
                                                   "strategies", "models", "params", "smote", "gan",
                                                   "out",    "seed",    "jobs",     "plots"};
    if (!j.is_object()) throw ParameterError("experiment config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ParameterError("unknown config key '" + k + "'");
    ExperimentConfig c;
    try {
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_relative() && !base.empty() ? base / path : path;
        };
        if (j.contains("data") && !j["data"].is_null()) c.data = resolve(j["data"].get<std::string>());
        if (j.contains("fixture")) {
            const auto& f = j["fixture"];
            set_if(f, "n", c.fixture.n);
            set_if(f, "prevalence", c.fixture.prevalence);
            set_if(f, "overlap", c.fixture.overlap);
            set_if(f, "seed", c.fixture.seed);
        }
        if (j.contains("encoding")) c.encoding = parse_encoding(j["encoding"].get<std::string>());
        set_if(j, "split_fraction", c.split_fraction);
        set_if(j, "runs", c.runs);
        set_if(j, "strategies", c.strategies);
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j["models"]) c.models.push_back(parse_model_kind(m.get<std::string>()));
        }
        if (j.contains("params")) c.params.apply_overrides(j["params"]);
        if (j.contains("smote")) set_if(j["smote"], "k_neighbors", c.smote.k_neighbors);
        if (j.contains("gan")) {
            const auto& g = j["gan"];
            set_if(g, "latent_dim", c.gan.latent_dim);
            set_if(g, "generator_hidden", c.gan.generator_hidden);
            set_if(g, "discriminator_hidden", c.gan.discriminator_hidden);
            set_if(g, "epochs", c.gan.epochs);
            set_if(g, "batch_size", c.gan.batch_size);
            set_if(g, "learning_rate", c.gan.learning_rate);
        }
        if (j.contains("out")) c.out = resolve(j["out"].get<std::string>());
        set_if(j, "seed", c.seed);
        set_if(j, "jobs", c.jobs);
        set_if(j, "plots", c.plots);
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("bad experiment config: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json models_j = nlohmann::json::array();
    for (auto m : models) models_j.push_back(std::string(to_string(m)));
    nlohmann::json j = {{"fixture",
                         {{"n", fixture.n},
                          {"prevalence", fixture.prevalence},
                          {"overlap", fixture.overlap},
                          {"seed", fixture.seed}}},
                        {"encoding", std::string(to_string(encoding))},
                        {"split_fraction", split_fraction},
                        {"runs", runs},
                        {"strategies", strategies},
                        {"models", models_j},
                        {"seed", seed}};
    j["data"] = data ? nlohmann::json(data->generic_string()) : nlohmann::json(nullptr);
    return j;
}

std::size_t CellResult::failures() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return !r.ok(); }));
}

const RunOutcome* CellResult::best() const {
    const RunOutcome* best = nullptr;
    for (const auto& r : runs) {
        if (!r.ok()) continue;
        if (!best || r.test->f1() > best->test->f1()) best = &r;
    }
    return best;
}

namespace {

RunAggregate aggregate_block(const std::vector<RunOutcome>& runs, bool train) {
    std::vector<EvaluationReport> reports;
    for (const auto& r : runs)
        if (r.ok()) reports.push_back(train ? *r.train : *r.test);
    if (reports.empty()) return {};
    return aggregate_runs(reports);
}

}  // namespace

RunAggregate CellResult::aggregate_train() const { return aggregate_block(runs, true); }
RunAggregate CellResult::aggregate_test() const { return aggregate_block(runs, false); }

std::size_t ExperimentResult::failures() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.failures();
    return n;
}

const CellResult* ExperimentResult::find(std::string_view strategy, ModelKind model) const {
    for (const auto& c : cells)
        if (c.strategy == strategy && c.model == model) return &c;
    return nullptr;
}

Dataset experiment_data(const ExperimentConfig& config) {
    if (config.data) return load_observations(*config.data, FeatureSchema::study());
    return generate_fixture(config.fixture);
}

namespace {

nlohmann::json importance_json(const std::vector<double>& imp, const std::vector<std::string>& names) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < imp.size() && i < names.size(); ++i) j[names[i]] = imp[i];
    return j;
}

nlohmann::json class_table(const EvaluationReport& r) {
    auto c = [](const ClassMetrics& m) {
        return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    };
    return {{"Absence", c(r.absence)}, {"Presence", c(r.presence)}, {"confusion_matrix", to_json(r.cm)}};
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

struct Slot {
    std::size_t cell;
    std::size_t run;
};

}  // namespace

nlohmann::json to_json(const RunOutcome& o, const CellResult& cell, const std::vector<std::string>& names) {
    nlohmann::json j = {{"strategy", cell.strategy},
                        {"model", std::string(to_string(cell.model))},
                        {"run", o.run},
                        {"seed", o.seed}};
    if (!o.ok()) {
        j["error"] = o.error;
        return j;
    }
    j["train"] = to_json(*o.train, false);
    j["test"] = to_json(*o.test, true);
    j["importance"] = importance_json(o.importance, names);
    return j;
}

nlohmann::json aggregate_json(const CellResult& cell, const std::vector<std::string>& names) {
    nlohmann::json failed = nlohmann::json::array();
    for (const auto& r : cell.runs)
        if (!r.ok()) failed.push_back({{"run", r.run}, {"error", r.error}});
    nlohmann::json j = {{"strategy", cell.strategy},
                        {"model", std::string(to_string(cell.model))},
                        {"runs", cell.runs.size()},
                        {"completed", cell.runs.size() - cell.failures()},
                        {"failed", failed}};
    if (cell.failures() == cell.runs.size()) return j;
    j["train"] = to_json(cell.aggregate_train());
    j["test"] = to_json(cell.aggregate_test());

    // mean importance over completed runs
    std::vector<double> imp(names.size(), 0.0);
    std::size_t n = 0;
    for (const auto& r : cell.runs) {
        if (!r.ok() || r.importance.size() != names.size()) continue;
        for (std::size_t i = 0; i < names.size(); ++i) imp[i] += r.importance[i];
        ++n;
    }
    if (n > 0) {
        for (auto& v : imp) v /= static_cast<double>(n);
        j["importance"] = importance_json(imp, names);
    }
    const RunOutcome* best = cell.best();
    j["best_run"] = {{"run", best->run},
                     {"seed", best->seed},
                     {"train", class_table(*best->train)},
                     {"test", class_table(*best->test)}};
    return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool write, const Progress& progress) {
    config.validate();
    const Dataset data = experiment_data(config);

    ExperimentResult result;
    for (const auto& f : data.schema()) result.feature_names.push_back(f.name);
    for (const auto& s : config.strategies)
        for (auto m : config.models) {
            CellResult cell;
            cell.strategy = ResamplePlan::parse(s).name();
            cell.model = m;
            cell.runs.resize(config.runs);
            result.cells.push_back(std::move(cell));
        }

    std::mutex progress_mutex;
    auto note = [&](const std::string& msg) {
        if (!progress) return;
        std::lock_guard lock(progress_mutex);
        progress(msg);
    };

    auto do_run = [&](std::size_t r_index) {
        const std::size_t run = r_index + 1;
        const Seed seed = config.seed + run;
        const auto [train, test] = split_train_test(data, {config.split_fraction, seed});
        std::size_t cell_index = 0;
        for (const auto& s : config.strategies) {
            ResamplePlan plan = ResamplePlan::parse(s);
            plan.seed = seed;
            plan.smote = config.smote;
            plan.gan = config.gan;
            plan.gan.seed = seed;
            std::optional<Dataset> augmented;
            std::string aug_error;
            try {
                augmented = apply_plan(train, plan);
            } catch (const std::exception& e) {
                aug_error = std::string("augmentation failed: ") + e.what();
            }
            for (auto kind : config.models) {
                auto& outcome = result.cells[cell_index++].runs[r_index];
                outcome.run = run;
                outcome.seed = seed;
                if (!augmented) {
                    outcome.error = aug_error;
                    continue;
                }
                try {
                    ModelParams params = config.params;
                    params.set_seed(seed);
                    params.threads = 1;
                    const TrainedModel model = train_model(kind, *augmented, params, config.encoding);
                    const Dataset train_block = kind == ModelKind::ocsvm ? augmented->filter_label(1) : *augmented;
                    const auto ptr = model.predict(train_block);
                    outcome.train = evaluate(train_block.labels(), ptr.labels, ptr.scores);
                    const auto pte = model.predict(test);
                    outcome.test = evaluate(test.labels(), pte.labels, pte.scores);
                    outcome.importance = model.feature_importance(test, seed);
                } catch (const std::exception& e) {
                    outcome.error = e.what();
                    outcome.train.reset();
                    outcome.test.reset();
                }
            }
        }
        note("run " + std::to_string(run) + "/" + std::to_string(config.runs) + " done");
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(config.runs)));
    if (jobs == 1) {
        for (std::size_t r = 0; r < config.runs; ++r) do_run(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t r; (r = next++) < config.runs;) do_run(r);
            });
        for (auto& t : pool) t.join();
    }

    if (!write) return result;

    const auto& out = config.out;
    for (const auto& cell : result.cells) {
        const auto dir = out / cell.strategy / std::string(to_string(cell.model));
        for (const auto& r : cell.runs)
            write_json(dir / ("run_" + std::to_string(r.run) + ".json"), to_json(r, cell, result.feature_names));
        write_json(dir / "aggregate.json", aggregate_json(cell, result.feature_names));
    }

    // dual-block mean(sd) tables and best-run per-class tables
    auto block_row = [](const CellResult& cell) {
        std::vector<std::string> row = {cell.strategy, std::string(to_string(cell.model))};
        if (cell.failures() == cell.runs.size()) {
            row.insert(row.end(), 6, "failed");
            return row;
        }
        const auto tr = cell.aggregate_train(), te = cell.aggregate_test();
        for (const auto* a : {&tr, &te}) {
            row.push_back(a->accuracy.format());
            row.push_back(a->f1.format());
            row.push_back(a->auc.format());
        }
        return row;
    };
    auto class_rows = [](const CellResult& cell, std::vector<std::vector<std::string>>& rows) {
        const RunOutcome* best = cell.best();
        if (!best) return;
        for (const auto& [block, rep] : {std::pair{"train", &*best->train}, std::pair{"test", &*best->test}}) {
            for (const auto* c : {&rep->absence, &rep->presence})
                rows.push_back({cell.strategy, std::string(to_string(cell.model)), std::to_string(best->run), block,
                                c->name, fmt3(c->precision), fmt3(c->recall), fmt3(c->f1), std::to_string(c->support)});
        }
    };
    csv::Table t4, t6, t5, t7;
    t4.header = t6.header = {"strategy",      "model",    "train_accuracy", "train_f1",
                             "train_auc",     "test_accuracy", "test_f1", "test_auc"};
    t5.header = t7.header = {"strategy", "model", "run", "block", "class", "precision", "recall", "f1", "support"};
    for (const auto& cell : result.cells) {
        const bool plain = cell.strategy == "none";
        (plain ? t4 : t6).rows.push_back(block_row(cell));
        class_rows(cell, plain ? t5.rows : t7.rows);
    }
    csv::write(out / "tables" / "table4.csv", t4);
    csv::write(out / "tables" / "table5.csv", t5);
    csv::write(out / "tables" / "table6.csv", t6);
    csv::write(out / "tables" / "table7.csv", t7);

    if (config.plots) {
        const auto plots = out / "plots";
        export_exploration(data, plots);
        for (const auto& cell : result.cells) {
            const RunOutcome* best = cell.best();
            if (!best) continue;
            PlotExporter ex(plots, cell.strategy, std::string(to_string(cell.model)));
            if (!best->test->pr.empty()) {
                ex.curve("pr_curve", best->test->pr, "recall", "precision");
                ex.curve("roc_curve", best->test->roc, "fpr", "tpr");
            }
            if (!best->importance.empty()) ex.importance("importance", result.feature_names, best->importance);
        }
        // real versus generated training rows for each augmenting strategy, first run
        const auto [train, test] = split_train_test(data, {config.split_fraction, config.seed + 1});
        for (const auto& s : config.strategies) {
            ResamplePlan plan = ResamplePlan::parse(s);
            if (plan.strategy == Strategy::none || plan.strategy == Strategy::undersample) continue;
            plan.seed = config.seed + 1;
            plan.smote = config.smote;
            plan.gan = config.gan;
            plan.gan.seed = plan.seed;
            try {
                const Dataset aug = apply_plan(train, plan);
                const Encoder enc = Encoder::fit(aug, Encoding::raw);
                const Matrix x = enc.transform(aug);
                const PcaModel pca = pca_fit(x, 2);
                std::vector<int> origin(aug.size());
                for (std::size_t r = 0; r < aug.size(); ++r)
                    origin[r] = !aug.origins().empty() && aug.origins()[r] == Origin::synthetic ? 1 : 0;
                PlotExporter ex(plots, plan.name(), "data");
                ex.pca_scatter("pca_origin", pca.transform(x), origin);
                ex.pca_scatter("pca_class", pca.transform(x), aug.labels());
                ex.pairs("pairs", aug);
            } catch (const std::exception&) {
            }
        }
    }
    write_json(out / "config.json", config.to_json());
    return result;
}

}  // namespace stinger
