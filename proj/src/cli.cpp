#include "stinger/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "stinger/analysis.hpp"
#include "stinger/augment.hpp"
#include "stinger/csv.hpp"
#include "stinger/error.hpp"
#include "stinger/experiment.hpp"
#include "stinger/fixture.hpp"
#include "stinger/metrics.hpp"
#include "stinger/model.hpp"

namespace stinger {

namespace {

struct Paths {
    std::string data;
    std::string out;
};

Dataset load(const std::string& path, bool drop_incomplete, std::ostream& err) {
    LoadOptions opts;
    opts.drop_incomplete_rows = drop_incomplete;
    opts.warn = [&err](std::string_view msg) { err << "warning: " << msg << '\n'; };
    return load_observations(path, FeatureSchema::study(), opts);
}

void emit_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << j.dump(2) << '\n';
        return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << '\n';
}

std::optional<Seed> env_seed() {
    const char* s = std::getenv("STINGER_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != std::string(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError(std::string("STINGER_SEED is not an unsigned integer: ") + s);
    }
}

std::vector<int> read_int_column(const csv::Table& t, const std::string& name, const std::string& file) {
    const auto idx = t.column(name);
    if (idx < 0) throw SchemaError(file + " has no '" + name + "' column");
    std::vector<int> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& cell = t.rows[r].at(static_cast<std::size_t>(idx));
        if (cell == "0") out.push_back(0);
        else if (cell == "1") out.push_back(1);
        else throw LabelError(file + ": '" + name + "' must be 0 or 1 (data row " + std::to_string(r) + ")");
    }
    return out;
}

std::vector<double> read_double_column(const csv::Table& t, const std::string& name, const std::string& file) {
    const auto idx = t.column(name);
    if (idx < 0) throw SchemaError(file + " has no '" + name + "' column");
    std::vector<double> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& cell = t.rows[r].at(static_cast<std::size_t>(idx));
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ParseError(file + ": non-numeric '" + name + "' value '" + cell + "'", r);
        }
    }
    return out;
}

nlohmann::json importance_json(const TrainedModel& model, const std::vector<double>& imp) {
    nlohmann::json j = nlohmann::json::object();
    const auto& schema = model.encoder().schema();
    for (std::size_t i = 0; i < imp.size(); ++i) j[schema[i].name] = imp[i];
    return j;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bluebottle presence toolkit: ingest, augment, train, evaluate and analyse beach observations"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate an observation table and write the cleaned or encoded rows");
    std::string ingest_data, ingest_out, ingest_encoded, ingest_encoding = "raw";
    bool ingest_drop = false;
    ingest->add_option("--data", ingest_data, "Observation CSV")->required();
    ingest->add_option("--out", ingest_out, "Write the validated rows here");
    ingest->add_option("--encoded", ingest_encoded, "Write the model encoding here");
    ingest->add_option("--encoding", ingest_encoding, "raw | subgroups")->check(CLI::IsMember({"raw", "subgroups"}));
    ingest->add_flag("--drop-incomplete", ingest_drop, "Drop rows with missing cells instead of failing");

    // summarize
    auto* summ = app.add_subcommand("summarize", "Per-beach presence/absence counts and feature mean(sd)");
    std::string summ_data;
    bool summ_json = false;
    summ->add_option("--data", summ_data, "Observation CSV")->required();
    summ->add_flag("--json", summ_json, "Print JSON instead of a table");

    // augment
    auto* aug = app.add_subcommand("augment", "Resample a training table");
    std::string aug_data, aug_out, aug_strategy = "synthneg-copula";
    Seed aug_seed = 0;
    std::size_t aug_k = 5;
    int aug_epochs = 300;
    aug->add_option("--in,--data", aug_data, "Training CSV")->required();
    aug->add_option("--strategy", aug_strategy, "none | smote | undersample | synthneg-copula | synthneg-gan");
    aug->add_option("--seed", aug_seed, "Random seed");
    aug->add_option("--k", aug_k, "SMOTE neighbours");
    aug->add_option("--gan-epochs", aug_epochs, "GAN training epochs");
    aug->add_option("--out", aug_out, "Output CSV (adds an origin column)")->required();

    // train
    auto* train = app.add_subcommand("train", "Fit a classifier and save it");
    std::string tr_data, tr_out, tr_model = "forest", tr_encoding = "raw", tr_params;
    Seed tr_seed = 0;
    unsigned tr_threads = 1;
    train->add_option("--data", tr_data, "Training CSV")->required();
    train->add_option("--model", tr_model, "mlp | forest | boost | ocsvm")
        ->check(CLI::IsMember({"mlp", "forest", "boost", "ocsvm"}));
    train->add_option("--encoding", tr_encoding, "raw | subgroups")->check(CLI::IsMember({"raw", "subgroups"}));
    train->add_option("--params", tr_params, "JSON file with per-model parameter sections");
    train->add_option("--seed", tr_seed, "Random seed");
    train->add_option("--threads", tr_threads, "Forest worker threads (0: all cores)");
    train->add_option("--out", tr_out, "Model file")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score predictions against the truth");
    std::string ev_pred, ev_truth, ev_model, ev_data, ev_out;
    bool ev_curves = false;
    eval->add_option("--pred", ev_pred, "Predictions CSV with score and predicted columns");
    eval->add_option("--truth", ev_truth, "CSV with a presence column");
    eval->add_option("--model", ev_model, "Saved model (with --data)");
    eval->add_option("--data", ev_data, "Observation CSV to predict (with --model)");
    eval->add_option("--out", ev_out, "Metrics JSON (stdout when absent)");
    eval->add_flag("--curves", ev_curves, "Include PR and ROC points");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Repeated seeded runs over strategies and models");
    std::string ex_config, ex_out;
    std::optional<std::size_t> ex_runs;
    std::optional<Seed> ex_seed;
    unsigned ex_jobs = 0;
    bool ex_quiet = false;
    exp->add_option("--config", ex_config, "Experiment JSON")->required();
    exp->add_option("--out", ex_out, "Report directory (overrides the config)");
    exp->add_option("--runs", ex_runs, "Run count (overrides the config)");
    exp->add_option("--seed", ex_seed, "Master seed (STINGER_SEED takes precedence)");
    exp->add_option("--jobs", ex_jobs, "Concurrent runs (overrides the config)");
    exp->add_flag("--quiet", ex_quiet, "No progress messages");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Export exploratory plot data");
    std::string an_data, an_out;
    ana->add_option("--data", an_data, "Observation CSV")->required();
    ana->add_option("--out", an_out, "Output directory")->required();

    // fixture
    auto* fix = app.add_subcommand("fixture", "Generate a synthetic observation table");
    FixtureSpec fx;
    std::string fx_out;
    fix->add_option("--n", fx.n, "Row count");
    fix->add_option("--prevalence", fx.prevalence, "Positive fraction");
    fix->add_option("--overlap", fx.overlap, "Class overlap in [0, 1]");
    fix->add_option("--seed", fx.seed, "Random seed");
    fix->add_option("--out", fx_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            const Dataset d = load(ingest_data, ingest_drop, err);
            out << "rows " << d.size() << ", presence " << d.count(1) << ", absence " << d.count(0) << '\n';
            if (!ingest_out.empty()) write_observations(ingest_out, d);
            if (!ingest_encoded.empty()) {
                const Encoder enc = Encoder::fit(d, parse_encoding(ingest_encoding));
                const Matrix x = enc.transform(d);
                csv::Table t;
                for (const auto& c : enc.columns()) t.header.push_back(c.name);
                t.header.push_back("presence");
                for (Eigen::Index r = 0; r < x.rows(); ++r) {
                    std::vector<std::string> row;
                    for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(csv::format_number(x(r, c)));
                    row.push_back(std::to_string(d.labels()[static_cast<std::size_t>(r)]));
                    t.rows.push_back(std::move(row));
                }
                csv::write(ingest_encoded, t);
            }
        } else if (*summ) {
            const Summary s = summarize(load(summ_data, false, err));
            if (summ_json) {
                auto group = [](const GroupSummary& g) {
                    nlohmann::json stats = nlohmann::json::object();
                    for (const auto& f : g.stats) stats[f.feature] = {{"mean", f.mean}, {"sd", f.sd}};
                    return nlohmann::json{{"beach", g.beach}, {"presence", g.presence}, {"absence", g.absence},
                                          {"features", stats}};
                };
                nlohmann::json j = nlohmann::json::array();
                for (const auto& g : s.beaches) j.push_back(group(g));
                j.push_back(group(s.overall));
                out << j.dump(2) << '\n';
            } else {
                out << format_summary_table(s);
            }
        } else if (*aug) {
            const Dataset d = load(aug_data, false, err);
            ResamplePlan plan = ResamplePlan::parse(aug_strategy);
            plan.seed = aug_seed;
            plan.smote.k_neighbors = aug_k;
            plan.gan.epochs = aug_epochs;
            plan.gan.seed = aug_seed;
            const Dataset result = apply_plan(d, plan);
            write_observations(aug_out, result, true);
            out << plan.name() << ": " << d.size() << " -> " << result.size() << " rows (presence "
                << result.count(1) << ", absence " << result.count(0) << ")\n";
        } else if (*train) {
            const Dataset d = load(tr_data, false, err);
            ModelParams params;
            if (!tr_params.empty()) {
                std::ifstream in(tr_params);
                if (!in) throw InputError("cannot open " + tr_params);
                nlohmann::json j;
                try {
                    in >> j;
                } catch (const nlohmann::json::exception& e) {
                    throw ParameterError("parameter file is not JSON: " + std::string(e.what()));
                }
                params.apply_overrides(j);
            }
            params.set_seed(tr_seed);
            params.threads = tr_threads;
            const auto kind = parse_model_kind(tr_model);
            const TrainedModel m = train_model(kind, d, params, parse_encoding(tr_encoding),
                                               [&err](const std::string& msg) { err << "warning: " << msg << '\n'; });
            m.save(tr_out);
            out << "trained " << tr_model << " on " << d.size() << " rows -> " << tr_out << '\n';
        } else if (*eval) {
            std::vector<int> truth, predicted;
            std::vector<double> scores;
            nlohmann::json extra;
            if (!ev_model.empty()) {
                if (ev_data.empty()) throw InputError("--model needs --data");
                const TrainedModel m = TrainedModel::load(ev_model);
                const Dataset d = load(ev_data, false, err);
                const auto p = m.predict(d);
                truth = d.labels();
                predicted = p.labels;
                scores = p.scores;
                if (auto imp = m.importance()) extra = importance_json(m, *imp);
            } else {
                if (ev_pred.empty() || ev_truth.empty()) throw InputError("evaluate needs --pred and --truth, or --model and --data");
                const csv::Table pt = csv::read(ev_pred);
                const csv::Table tt = csv::read(ev_truth);
                truth = read_int_column(tt, "presence", ev_truth);
                predicted = read_int_column(pt, "predicted", ev_pred);
                scores = pt.column("score") >= 0 ? read_double_column(pt, "score", ev_pred)
                                            : std::vector<double>(predicted.begin(), predicted.end());
                if (truth.size() != predicted.size()) throw InputError("prediction and truth row counts differ");
            }
            nlohmann::json j = to_json(evaluate(truth, predicted, scores), ev_curves);
            if (!extra.is_null()) j["importance"] = extra;
            emit_json(j, ev_out, out);
        } else if (*exp) {
            ExperimentConfig cfg = ExperimentConfig::load(ex_config);
            if (!ex_out.empty()) cfg.out = ex_out;
            if (ex_runs) cfg.runs = *ex_runs;
            if (ex_seed) cfg.seed = *ex_seed;
            if (auto s = env_seed()) cfg.seed = *s;
            if (ex_jobs > 0) cfg.jobs = ex_jobs;
            Progress progress;
            if (!ex_quiet) progress = [&err](const std::string& msg) { err << msg << '\n'; };
            const ExperimentResult r = run_experiment(cfg, true, progress);
            for (const auto& cell : r.cells) {
                const auto te = cell.aggregate_test();
                out << cell.strategy << '/' << to_string(cell.model) << ": test F1 "
                    << (cell.failures() == cell.runs.size() ? std::string("failed") : te.f1.format()) << ", AUC "
                    << (cell.failures() == cell.runs.size() ? std::string("failed") : te.auc.format()) << '\n';
            }
            out << "report written to " << cfg.out.string() << '\n';
            if (r.failures() > 0) {
                err << r.failures() << " run(s) failed; see the per-run reports\n";
                return 2;
            }
        } else if (*ana) {
            const Dataset d = load(an_data, false, err);
            export_exploration(d, an_out);
            out << "plot data written to " << an_out << '\n';
        } else if (*fix) {
            const Dataset d = generate_fixture(fx);
            write_observations(fx_out, d);
            out << "wrote " << d.size() << " rows (" << d.count(1) << " positive) to " << fx_out << '\n';
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace stinger
