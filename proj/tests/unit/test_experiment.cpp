#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "stinger/cli.hpp"
#include "stinger/error.hpp"
#include "stinger/experiment.hpp"
#include "stinger/fixture.hpp"
#include "util.hpp"

using namespace stinger;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "stinger");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

ExperimentConfig small_config(const std::filesystem::path& out) {
    ExperimentConfig c;
    c.fixture = {600, 0.1, 0.6, 3};
    c.runs = 2;
    c.strategies = {"none", "smote", "synthneg-copula"};
    c.params.mlp.max_epochs = 15;
    c.params.forest.n_trees = 20;
    c.params.boost.n_rounds = 15;
    c.out = out;
    c.seed = 11;
    return c;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[std::filesystem::relative(e.path(), root).generic_string()] = testutil::read_file(e.path());
    return files;
}

double forest_test_auc(const FixtureSpec& spec) {
    const Dataset d = generate_fixture(spec);
    const auto [train, test] = split_train_test(d, {0.6, spec.seed});
    ForestParams p;
    p.seed = spec.seed;
    const auto m = train_forest(train, p);
    return *roc_auc(test.labels(), m.predict(test).scores);
}

}  // namespace

TEST_CASE("fixture prevalence and shape") {
    const Dataset d = generate_fixture({1000, 0.06, 0.5, 1});
    CHECK(d.size() == 1000);
    CHECK(d.count(1) == 60);
    CHECK(d.schema() == FeatureSchema::study());
    CHECK(d.has_dates());
    CHECK(d.has_beaches());
    const Dataset again = generate_fixture({1000, 0.06, 0.5, 1});
    CHECK(again.cells() == d.cells());
    CHECK(again.labels() == d.labels());
    CHECK_THROWS_AS(generate_fixture({10, 1.5, 0.5, 1}), ParameterError);
    CHECK_THROWS_AS(generate_fixture({10, 0.5, -0.1, 1}), ParameterError);
}

TEST_CASE("fixture overlap controls separability") {
    double mean = 0.0;
    for (Seed s = 1; s <= 3; ++s) mean += forest_test_auc({2000, 0.2, 1.0, s}) / 3.0;
    CAPTURE(mean);
    CHECK(std::abs(mean - 0.5) < 0.05);

    const Dataset d = generate_fixture({2000, 0.06, 0.0, 5});
    const auto [train, test] = split_train_test(d, {0.6, 5});
    const auto m = train_forest(train, ForestParams{});
    const auto pr = m.predict(test);
    CHECK(f1(confusion_matrix(test.labels(), pr.labels)) >= 0.9);
}

TEST_CASE("experiment config parsing") {
    const auto c = ExperimentConfig::from_json(
        {{"runs", 3}, {"strategies", {"smote"}}, {"models", {"forest"}}, {"fixture", {{"n", 500}}}, {"seed", 4}});
    CHECK(c.runs == 3);
    CHECK(c.fixture.n == 500);
    CHECK(c.models == std::vector<ModelKind>{ModelKind::forest});
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"rnus", 3}}), ParameterError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"strategies", {"oversample"}}}).validate(), ParameterError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"runs", 0}}).validate(), ParameterError);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"split_fraction", 1.0}}).validate(), ParameterError);
    const auto back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
}

TEST_CASE("experiment report tree is reproducible and independent of jobs") {
    const auto a = testutil::temp_dir("exp_a"), b = testutil::temp_dir("exp_b");
    auto ca = small_config(a);
    const auto ra = run_experiment(ca);
    auto cb = small_config(b);
    cb.jobs = 3;
    run_experiment(cb);
    auto sa = snapshot(a), sb = snapshot(b);
    sa.erase("config.json");
    sb.erase("config.json");
    CHECK(sa == sb);

    CHECK(ra.cells.size() == 12);
    CHECK(ra.failures() == 0);
    CHECK(std::filesystem::exists(a / "none" / "forest" / "run_1.json"));
    CHECK(std::filesystem::exists(a / "none" / "forest" / "run_2.json"));
    CHECK(std::filesystem::exists(a / "smote" / "ocsvm" / "aggregate.json"));
    CHECK(std::filesystem::exists(a / "tables" / "table4.csv"));
    CHECK(std::filesystem::exists(a / "tables" / "table6.csv"));
    CHECK(std::filesystem::exists(a / "plots"));

    const auto* cell = ra.find("smote", ModelKind::forest);
    REQUIRE(cell != nullptr);
    CHECK(cell->runs[0].seed == 12);
    CHECK(cell->runs[1].seed == 13);
    const auto* best = cell->best();
    REQUIRE(best != nullptr);
    for (const auto& r : cell->runs) CHECK(best->test->f1() >= r.test->f1());
    const auto run = nlohmann::json::parse(testutil::read_file(a / "smote" / "forest" / "run_1.json"));
    CHECK(run["seed"] == 12);
    for (const auto& c : ra.cells)
        for (const auto& o : c.runs) {
            CHECK(o.train.has_value());
            CHECK(o.test.has_value());
        }
    CHECK(run.contains("train"));
    CHECK(run.contains("test"));
    const auto* plain = ra.find("none", ModelKind::forest);
    const auto agg = plain->aggregate_test();
    CHECK(agg.f1.mean < 0.2);
    for (const auto& o : plain->runs) CHECK(o.test->absence.f1 > 0.9);
    const auto imp = run["importance"];
    CHECK(imp.size() == FeatureSchema::study().size());
}

TEST_CASE("failed runs are recorded and reported") {
    const auto dir = testutil::temp_dir("exp_fail");
    ExperimentConfig c;
    c.fixture = {40, 0.5, 0.5, 1};
    c.runs = 1;
    c.strategies = {"synthneg-copula"};
    c.models = {ModelKind::forest};
    c.out = dir / "out";
    c.plots = false;
    const auto r = run_experiment(c);
    CHECK(r.failures() == 1);
    CHECK_FALSE(r.cells[0].runs[0].error.empty());
    const auto run = nlohmann::json::parse(testutil::read_file(c.out / "synthneg-copula" / "forest" / "run_1.json"));
    CHECK(run.contains("error"));

    testutil::write_file(dir / "cfg.json",
                         R"({"fixture": {"n": 40, "prevalence": 0.5}, "runs": 1, "strategies": ["synthneg-copula"],
                            "models": ["forest"], "plots": false})");
    const auto res = cli({"experiment", "--config", (dir / "cfg.json").string(), "--out", (dir / "cli").string(), "--quiet"});
    CHECK(res.code == 2);
}

TEST_CASE("command line tool") {
    const auto dir = testutil::temp_dir("cli");
    const auto data = (dir / "fixture.csv").string();

    auto r = cli({"fixture", "--n", "1000", "--prevalence", "0.06", "--seed", "2", "--out", data});
    REQUIRE(r.code == 0);
    const auto loaded = load_observations(data, FeatureSchema::study());
    CHECK(loaded.count(1) == 60);

    CHECK(cli({"summarize", "--data", data}).code == 0);
    r = cli({"summarize", "--data", data, "--json"});
    CHECK(r.code == 0);
    const auto groups = nlohmann::json::parse(r.out);
    REQUIRE(groups.size() == 4);
    CHECK(groups.back()["beach"] == "All");
    CHECK(groups.back()["presence"] == 60);

    r = cli({"ingest", "--data", data, "--encoded", (dir / "enc.csv").string(), "--encoding", "subgroups"});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "enc.csv"));

    r = cli({"augment", "--in", data, "--strategy", "undersample", "--seed", "3", "--out", (dir / "under.csv").string()});
    CHECK(r.code == 0);
    CHECK(load_observations(dir / "under.csv", FeatureSchema::study()).size() == 120);

    const auto params = dir / "params.json";
    testutil::write_file(params, R"({"forest": {"n_trees": 10}})");
    r = cli({"train", "--data", data, "--model", "forest", "--params", params.string(), "--out", (dir / "m.json").string()});
    CHECK(r.code == 0);
    r = cli({"evaluate", "--model", (dir / "m.json").string(), "--data", data, "--out", (dir / "ev.json").string()});
    CHECK(r.code == 0);
    const auto ev = nlohmann::json::parse(testutil::read_file(dir / "ev.json"));
    CHECK(ev["confusion_matrix"]["tp"].get<int>() + ev["confusion_matrix"]["fn"].get<int>() == 60);

    testutil::write_file(dir / "pred.csv", "score,predicted\n0.9,1\n0.8,1\n0.7,0\n0.1,0\n");
    testutil::write_file(dir / "truth.csv", "presence\n1\n0\n1\n0\n");
    r = cli({"evaluate", "--pred", (dir / "pred.csv").string(), "--truth", (dir / "truth.csv").string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["auc"].get<double>() == doctest::Approx(0.75));
    CHECK(j["accuracy"].get<double>() == doctest::Approx(0.5));

    r = cli({"analyze", "--data", data, "--out", (dir / "plots").string()});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "plots" / "pairs__data__none.csv"));

    CHECK(cli({"fixture", "--bogus", "1", "--out", data}).code == 1);
    CHECK(cli({"fixture", "--prevalence", "2", "--out", data}).code == 1);
    CHECK(cli({"train", "--data", data, "--model", "svm", "--out", (dir / "x.json").string()}).code == 1);
    CHECK(cli({"summarize", "--data", (dir / "missing.csv").string()}).code != 0);
    testutil::write_file(dir / "bad.csv", std::string(testutil::kHeader) + "2017-01-05,Coogee,1,abc,10,1,10,0.1\n");
    r = cli({"summarize", "--data", (dir / "bad.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
}
