#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "stinger/augment.hpp"
#include "stinger/circular.hpp"
#include "stinger/experiment.hpp"
#include "stinger/fixture.hpp"
#include "stinger/metrics.hpp"
#include "stinger/model.hpp"

using namespace stinger;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> column(const Dataset& d, std::size_t f) {
    std::vector<double> v(d.size());
    for (std::size_t r = 0; r < d.size(); ++r) v[r] = d.cell(r, f);
    return v;
}

double ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

bool on_short_arc(double a, double b, double x) {
    const double span = std::abs(circular::signed_difference(a, b));
    return std::abs(std::abs(circular::signed_difference(a, x)) + std::abs(circular::signed_difference(x, b)) - span) <
           1e-7;
}

Outcome metric_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::bernoulli_distribution coin(0.35);
    std::vector<int> y(1000), p(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        y[i] = coin(rng);
        p[i] = coin(rng);
    }
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < 1000; ++i) (y[i] ? (p[i] ? tp : fn) : (p[i] ? fp : tn)) += 1;
    const auto cm = confusion_matrix(y, p);
    const double pr = tp / (tp + fp), rc = tp / (tp + fn);
    bool ok = precision(cm) == pr && recall(cm) == rc && accuracy(cm) == (tp + tn) / 1000.0 &&
              f1(cm) == 2 * tp / (2 * tp + fp + fn);

    double worst = 0.0;
    std::uniform_real_distribution<double> u;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> yy(200);
        std::vector<double> ss(200);
        for (std::size_t i = 0; i < 200; ++i) {
            yy[i] = coin(rng);
            ss[i] = std::round(u(rng) * 30) / 30;
        }
        double num = 0, pairs = 0;
        for (std::size_t i = 0; i < 200; ++i)
            for (std::size_t j = 0; j < 200; ++j)
                if (yy[i] && !yy[j]) {
                    pairs += 1;
                    num += ss[i] > ss[j] ? 1.0 : ss[i] == ss[j] ? 0.5 : 0.0;
                }
        worst = std::max(worst, std::abs(*roc_auc(yy, ss) - num / pairs));
    }
    const double t = seconds_since(t0);
    return check(ok && worst < 1e-9 && t < 1.0, fmt("counts exact, AUC max error %.2g, %.3f s", worst, t));
}

Outcome published_counts() {
    const ConfusionMatrix cm{.tp = 8, .tn = 1268, .fp = 89, .fn = 39};
    const double a = accuracy(cm), r = recall(cm), p = precision(cm);
    return check(std::abs(a - 0.9088) < 1e-4 && std::abs(r - 0.1702) < 1e-4 && std::abs(p - 0.0825) < 1e-4,
                 fmt("accuracy %.4f recall %.4f precision %.4f", a, r, p));
}

Outcome smote_geometry() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t violations = 0, rows = 0;
    for (Seed s = 0; s < 100; ++s) {
        const Dataset d = generate_fixture({2000, 0.06, 0.5, s});
        const auto res = smote_nc_detailed(d, {5, s});
        if (res.data.count(0) != res.data.count(1)) ++violations;
        if (!(res.data.cells().topRows(2000) == d.cells()) || res.data.labels().size() != 2000 + res.parents.size())
            ++violations;
        for (std::size_t i = 0; i < res.parents.size(); ++i) {
            const auto [a, b] = res.parents[i];
            const auto row = 2000 + i;
            ++rows;
            for (std::size_t f = 0; f < d.schema().size(); ++f) {
                const auto kind = d.schema()[f].kind;
                const double x = res.data.cell(row, f), va = d.cell(a, f), vb = d.cell(b, f);
                if (kind == FeatureKind::continuous && (x < std::min(va, vb) - 1e-12 || x > std::max(va, vb) + 1e-12))
                    ++violations;
                if (kind == FeatureKind::circular_degrees && !on_short_arc(va, vb, x)) ++violations;
            }
        }
    }
    const double t = seconds_since(t0);
    return check(violations == 0 && t < 5.0, fmt("%zu synthetic rows, %zu violations, %.2f s", rows, violations, t));
}

Outcome undersampling() {
    std::size_t bad = 0;
    const Dataset d = generate_fixture({2000, 0.06, 0.5, 4});
    std::vector<std::size_t> minority;
    for (std::size_t r = 0; r < d.size(); ++r)
        if (d.labels()[r] == 1) minority.push_back(r);
    for (Seed s = 0; s < 100; ++s) {
        const auto res = random_undersample_detailed(d, s);
        if (res.data.count(1) != 120 || res.data.count(0) != 120) ++bad;
        const std::set<std::size_t> seen(res.source_rows.begin(), res.source_rows.end());
        if (seen.size() != res.source_rows.size()) ++bad;
        for (auto r : minority)
            if (!seen.count(r)) ++bad;
    }
    return check(bad == 0, fmt("100 seeds, %zu violations", bad));
}

Outcome mlp_checks() {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    Matrix x(10, 6);
    std::vector<int> y(10);
    for (Eigen::Index r = 0; r < 10; ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) x(r, c) = g(rng);
        y[static_cast<std::size_t>(r)] = x(r, 0) + x(r, 1) > 0;
    }
    MlpParams p;
    p.l2_alpha = 0.1;
    Mlp m = Mlp::initialize(6, p);
    const auto analytic = m.gradient(x, y).flatten();
    auto params = m.network().parameters();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + 1e-5;
        m.network().set_parameters(params);
        const double up = m.loss(x, y);
        params[i] = keep - 1e-5;
        m.network().set_parameters(params);
        const double down = m.loss(x, y);
        params[i] = keep;
        m.network().set_parameters(params);
        const double num = (up - down) / 2e-5;
        worst = std::max(worst, std::abs(num - analytic[i]) / std::max(1e-8, std::abs(num) + std::abs(analytic[i])));
    }

    Matrix xor_x(4, 2);
    xor_x << 0, 0, 0, 1, 1, 0, 1, 1;
    const std::vector<int> xor_y = {0, 1, 1, 0};
    MlpParams xp;
    xp.learning_rate = 0.01;
    xp.batch_size = 4;
    const Mlp net = Mlp::fit(xor_x, xor_y, xp);
    const Matrix pr = net.predict_proba(xor_x);
    int correct = 0;
    for (Eigen::Index r = 0; r < 4; ++r) correct += (pr(r, 1) >= 0.5) == (xor_y[static_cast<std::size_t>(r)] == 1);
    return check(worst < 1e-4 && correct == 4,
                 fmt("%zu parameters, max relative error %.2g, XOR accuracy %.2f", params.size(), worst, correct / 4.0));
}

Outcome boosting() {
    const Dataset d = generate_fixture({1000, 0.2, 0.0, 3});
    const Encoder enc = Encoder::fit(d);
    const Matrix x = enc.transform(d);
    const auto m = GradientBoosting::fit(x, d.labels(), BoostParams{});
    bool monotone = m.loss_curve().size() == 101;
    for (std::size_t i = 1; i < m.loss_curve().size(); ++i) monotone &= m.loss_curve()[i] <= m.loss_curve()[i - 1] + 1e-12;
    const double pos = static_cast<double>(d.count(1));
    const double expected = std::log(3.0 * pos / (d.size() - pos));

    std::vector<int> balanced(d.size());
    for (std::size_t i = 0; i < balanced.size(); ++i) balanced[i] = i % 2;
    BoostParams unit;
    unit.scale_pos_weight = 1.0;
    unit.n_rounds = 1;
    const double base0 = GradientBoosting::fit(x, balanced, unit).base_score();
    return check(monotone && std::abs(m.base_score() - expected) < 1e-12 && base0 == 0.0,
                 fmt("loss %.4f -> %.4f over 100 rounds, base %.6f (expected %.6f), balanced base %g",
                     m.loss_curve().front(), m.loss_curve().back(), m.base_score(), expected, base0));
}

Outcome forest_reductions() {
    const Dataset d = generate_fixture({1500, 0.1, 0.4, 8});
    const Matrix x = Encoder::fit(d).transform(d);
    ForestParams p;
    p.n_trees = 1;
    p.max_features = static_cast<std::size_t>(x.cols());
    p.max_depth = -1;
    p.max_leaf_nodes = 0;
    p.min_samples_split = 2;
    p.min_samples_leaf = 1;
    p.ccp_alpha = 0.0;
    const auto forest = RandomForest::fit(x, d.labels(), p);
    const auto tree = DecisionTree::fit(x, d.labels(), p.tree_params(static_cast<std::size_t>(x.cols())));
    const bool same = forest.predict_proba(x) == tree.predict_proba(x);

    ForestParams inf;
    inf.ccp_alpha = std::numeric_limits<double>::infinity();
    inf.n_trees = 20;
    const auto prior = RandomForest::fit(x, d.labels(), inf).predict_proba(x);
    double dev = 0.0;
    for (double s : prior) dev = std::max(dev, std::abs(s - 0.1));
    return check(same && dev < 1e-12,
                 fmt("%zu leaves, identical predictions %s, prior deviation %.2g", tree.leaf_count(), same ? "yes" : "no", dev));
}

Outcome ocsvm_nu() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Matrix x(500, 2);
    for (Eigen::Index r = 0; r < 500; ++r) x.row(r) << g(rng), g(rng);
    bool ok = true;
    std::string detail;
    for (double nu : {0.1, 0.3, 0.5}) {
        OcsvmParams p;
        p.nu = nu;
        const auto m = OneClassSvm::fit(x, p);
        const auto labels = m.predict(x);
        const double out = std::count(labels.begin(), labels.end(), 0) / 500.0;
        const double sv = m.support_vectors().rows() / 500.0;
        ok &= out <= nu + 0.05 && sv >= nu - 0.05;
        detail += fmt("nu %.1f: outliers %.3f SV %.3f; ", nu, out, sv);
    }
    detail.resize(detail.size() - 2);
    return check(ok, detail);
}

Outcome von_mises() {
    double i0 = 0, i1 = 0, term0 = 1, term1 = 1;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            term0 *= 1.0 / (k * k);
            term1 *= 1.0 / (k * (k + 1));
        }
        i0 += term0;
        i1 += term1;
    }
    const double oracle = i1 / i0;
    const auto s = circular::sample_von_mises(90.0, 2.0, 10000, 3);
    const double r = circular::mean_resultant_length(s);

    auto a = circular::sample_von_mises(45.0, 30.0, 700, 5);
    const auto b = circular::sample_von_mises(250.0, 30.0, 300, 6);
    a.insert(a.end(), b.begin(), b.end());
    const auto mix = circular::fit_von_mises_mixture(a, 2, 2);
    bool monotone = true;
    for (std::size_t i = 1; i < mix.loglik_trace.size(); ++i) monotone &= mix.loglik_trace[i] >= mix.loglik_trace[i - 1] - 1e-9;
    auto comps = mix.components;
    std::sort(comps.begin(), comps.end(), [](auto& x, auto& y) { return x.weight > y.weight; });
    const double e0 = std::abs(circular::signed_difference(45.0, comps[0].mu));
    const double e1 = std::abs(circular::signed_difference(250.0, comps[1].mu));
    const double we = std::abs(comps[0].weight - 0.7);
    return check(std::abs(r - oracle) < 0.02 && std::abs(oracle - 0.6978) < 1e-4 && monotone && e0 < 5 && e1 < 5 && we < 0.05,
                 fmt("R %.4f (oracle %.4f), EM monotone %s, mean errors %.2f/%.2f deg, weight error %.3f", r, oracle,
                     monotone ? "yes" : "no", e0, e1, we));
}

double max_correlation_gap(const Dataset& reference, const Dataset& generated, const std::vector<std::size_t>& cols) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t j = i + 1; j < cols.size(); ++j) {
            const double real = corr(normal_scores(column(reference, cols[i])), normal_scores(column(reference, cols[j])));
            const double synth = corr(normal_scores(column(generated, cols[i])), normal_scores(column(generated, cols[j])));
            worst = std::max(worst, std::abs(real - synth));
        }
    return worst;
}

Outcome copula_fidelity() {
    const Dataset all = generate_fixture({8000, 0.5, 0.5, 21}).filter_label(0);
    std::vector<std::size_t> fit_rows, held_rows;
    for (std::size_t r = 0; r < all.size(); ++r) (r % 2 ? held_rows : fit_rows).push_back(r);
    const Dataset fit = all.subset(fit_rows), held = all.subset(held_rows);
    const auto model = fit_copula_negative_model(fit);
    const Dataset gen = sample_synthetic_negatives(model, 500, 4);
    double worst_ks = 0.0;
    for (std::size_t f = 0; f < gen.schema().size(); ++f) worst_ks = std::max(worst_ks, ks(column(gen, f), column(held, f)));
    const double fixture_gap = max_correlation_gap(fit, sample_synthetic_negatives(model, 2000, 5), model.continuous);

    FeatureSchema schema({{"a", FeatureKind::continuous, "", {}},
                          {"b", FeatureKind::continuous, "", {}},
                          {"c", FeatureKind::continuous, "", {}}});
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    Matrix cells(2000, 3);
    for (Eigen::Index r = 0; r < 2000; ++r) {
        const double z0 = g(rng), z1 = g(rng), z2 = g(rng);
        const double b = 0.6 * z0 + 0.8 * z1;
        cells.row(r) << std::exp(z0), b * b * b, -0.4 * b + std::sqrt(0.84) * z2;
    }
    const Dataset corr_data(schema, cells, std::vector<int>(2000, 0));
    const auto corr_model = fit_copula_negative_model(corr_data);
    const double corr_gap = max_correlation_gap(corr_data, sample_synthetic_negatives(corr_model, 2000, 7), {0, 1, 2});
    return check(worst_ks <= 0.15 && fixture_gap <= 0.1 && corr_gap <= 0.1,
                 fmt("max KS %.3f, normal-score correlation gap %.3f on fixture negatives, %.3f on correlated columns",
                     worst_ks, fixture_gap, corr_gap));
}

ExperimentConfig forest_config(std::size_t runs) {
    ExperimentConfig c;
    c.fixture = {2500, 0.06, 0.7, 7};
    c.runs = runs;
    c.strategies = {"none", "synthneg-copula"};
    c.models = {ModelKind::forest};
    c.plots = false;
    c.jobs = std::max(1u, std::thread::hardware_concurrency());
    return c;
}

Outcome directional() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_experiment(forest_config(5), false);
    const double base = r.find("none", ModelKind::forest)->aggregate_test().f1.mean;
    const double synth = r.find("synthneg-copula", ModelKind::forest)->aggregate_test().f1.mean;
    const double t = seconds_since(t0);
    return check(synth - base >= 0.2 && t < 120.0,
                 fmt("test F1 %.3f -> %.3f (gain %.3f), %.1f s", base, synth, synth - base, t));
}

Outcome real_data() {
    const char* env = std::getenv("STINGER_DATA");
    fs::path path = env ? fs::path(env) : fs::path("data/observations.csv");
    if (!fs::exists(path)) return {Status::skip, "observation data not found (set STINGER_DATA)"};
    auto c = forest_config(10);
    c.data = path;
    c.strategies = {"synthneg-copula"};
    const auto r = run_experiment(c, false);
    const auto& cell = *r.find("synthneg-copula", ModelKind::forest);
    const auto agg = cell.aggregate_test();
    std::vector<double> imp(r.feature_names.size(), 0.0);
    for (const auto& run : cell.runs)
        for (std::size_t f = 0; f < run.importance.size(); ++f) imp[f] += run.importance[f];
    const auto top = r.feature_names[static_cast<std::size_t>(std::max_element(imp.begin(), imp.end()) - imp.begin())];
    return check(std::abs(agg.accuracy.mean - 0.767) <= 0.08 && std::abs(agg.f1.mean - 0.775) <= 0.10 && top == "wind_dir_deg",
                 fmt("accuracy %.3f, F1 %.3f, top feature %s", agg.accuracy.mean, agg.f1.mean, top.c_str()));
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).generic_string()] = ss.str();
    }
    return files;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "stinger_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"fixture": {"n": 800, "prevalence": 0.1, "overlap": 0.6, "seed": 3}, "runs": 2,
                   "strategies": ["none", "smote", "undersample", "synthneg-copula"],
                   "params": {"mlp": {"max_epochs": 20}, "forest": {"n_trees": 30}, "boost": {"n_rounds": 30}},
                   "seed": 42})";
    }
    std::string base = std::string(STINGER_BINARY) + " experiment --quiet --config " + (dir / "config.json").string();
    const int a = std::system((base + " --out " + (dir / "a").string() + " > /dev/null").c_str());
    const int b = std::system((base + " --out " + (dir / "b").string() + " --jobs 4 > /dev/null").c_str());
    if (a != 0 || b != 0) return {Status::fail, fmt("experiment exited with %d / %d", a, b)};
    const auto ta = tree_contents(dir / "a"), tb = tree_contents(dir / "b");
    std::size_t differing = 0;
    for (const auto& [name, text] : ta) {
        auto it = tb.find(name);
        if (it == tb.end() || it->second != text) ++differing;
    }
    differing += tb.size() > ta.size() ? tb.size() - ta.size() : 0;
    return check(differing == 0 && !ta.empty(), fmt("%zu files compared, %zu differ", ta.size(), differing));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"metric oracle equivalence", metric_oracle},
        {"confusion-count arithmetic", published_counts},
        {"SMOTE geometry", smote_geometry},
        {"undersampling balance", undersampling},
        {"MLP gradient and XOR", mlp_checks},
        {"boosting loss and base score", boosting},
        {"forest reductions", forest_reductions},
        {"one-class SVM nu-property", ocsvm_nu},
        {"von Mises machinery", von_mises},
        {"copula fidelity", copula_fidelity},
        {"synthetic-negative gain", directional},
        {"real-data reproduction", real_data},
        {"report determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        failures += o.status == Status::fail;
        std::printf("%s %2zu %s: %s\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
