#include <doctest.h>

#include <cmath>
#include <random>

#include "stinger/error.hpp"
#include "stinger/metrics.hpp"

using namespace stinger;

namespace {

std::vector<int> repeat(std::initializer_list<std::pair<int, std::size_t>> blocks) {
    std::vector<int> v;
    for (auto [value, n] : blocks) v.insert(v.end(), n, value);
    return v;
}

double pairwise_auc(const std::vector<int>& y, const std::vector<double>& s) {
    double num = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1.0;
                num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return num / pairs;
}

}  // namespace

TEST_CASE("metrics from published confusion counts") {
    const ConfusionMatrix cm{.tp = 8, .tn = 1268, .fp = 89, .fn = 39};
    CHECK(accuracy(cm) == doctest::Approx(0.9088).epsilon(1e-4));
    CHECK(recall(cm) == doctest::Approx(0.1702).epsilon(1e-3));
    CHECK(precision(cm) == doctest::Approx(0.0825).epsilon(1e-3));
    CHECK(std::abs(accuracy(cm) - 0.9088) < 1e-4);
    CHECK(std::abs(recall(cm) - 0.1702) < 1e-4);
    CHECK(std::abs(precision(cm) - 0.0825) < 1e-4);

    const ConfusionMatrix mlp{.tp = 82, .tn = 44, .fp = 14, .fn = 40};
    CHECK(accuracy(mlp) == doctest::Approx(126.0 / 180.0));
    CHECK(precision(mlp) == doctest::Approx(82.0 / 96.0));
    CHECK(recall(mlp) == doctest::Approx(82.0 / 122.0));
    const auto abs = flipped(mlp);
    CHECK(abs.tp == 44);
    CHECK(abs.fn == 14);
    CHECK(precision(abs) == doctest::Approx(44.0 / 84.0));
}

TEST_CASE("evaluate builds the per-class report from labels") {
    const auto actual = repeat({{0, 1268}, {0, 89}, {1, 39}, {1, 8}});
    const auto pred = repeat({{0, 1268}, {1, 89}, {0, 39}, {1, 8}});
    std::vector<double> scores(pred.begin(), pred.end());
    const auto r = evaluate(actual, pred, scores);
    CHECK(r.cm == ConfusionMatrix{.tp = 8, .tn = 1268, .fp = 89, .fn = 39});
    CHECK(r.presence.support == 47);
    CHECK(r.absence.support == 1357);
    CHECK(r.absence.recall == doctest::Approx(1268.0 / 1357.0));
    CHECK(r.f1() == doctest::Approx(2.0 * 8 / (2.0 * 8 + 89 + 39)));
    const auto j = to_json(r);
    CHECK(j["confusion_matrix"]["tp"] == 8);
    CHECK(to_json(r, false).contains("pr_curve") == false);
}

TEST_CASE("zero denominators give zero") {
    const ConfusionMatrix none{.tp = 0, .tn = 10, .fp = 0, .fn = 0};
    CHECK(precision(none) == 0.0);
    CHECK(recall(none) == 0.0);
    CHECK(f1(none) == 0.0);
    CHECK(accuracy(ConfusionMatrix{}) == 0.0);
}

TEST_CASE("counting metrics agree with a brute-force oracle") {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> y(1000), p(1000);
        for (std::size_t i = 0; i < 1000; ++i) {
            y[i] = coin(rng);
            p[i] = coin(rng);
        }
        double tp = 0, fp = 0, fn = 0, correct = 0;
        for (std::size_t i = 0; i < 1000; ++i) {
            tp += y[i] && p[i];
            fp += !y[i] && p[i];
            fn += y[i] && !p[i];
            correct += y[i] == p[i];
        }
        const auto cm = confusion_matrix(y, p);
        CHECK(precision(cm) == tp / (tp + fp));
        CHECK(recall(cm) == tp / (tp + fn));
        CHECK(accuracy(cm) == correct / 1000.0);
        const double pr = tp / (tp + fp), rc = tp / (tp + fn);
        CHECK(f1(cm) == doctest::Approx(2 * pr * rc / (pr + rc)).epsilon(1e-15));
        CHECK(f1(cm) >= std::min(pr, rc));
        CHECK(f1(cm) <= std::max(pr, rc));
    }
}

TEST_CASE("AUC worked example and pairwise oracle") {
    const std::vector<int> y = {1, 0, 1, 0};
    const std::vector<double> s = {0.9, 0.8, 0.7, 0.1};
    CHECK(*roc_auc(y, s) == doctest::Approx(0.75));
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> grid(0, 9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 20 + trial;
        std::vector<int> yy(n);
        std::vector<double> ss(n);
        for (std::size_t i = 0; i < n; ++i) {
            yy[i] = grid(rng) < 4;
            ss[i] = grid(rng) / 9.0;
        }
        yy[0] = 1;
        yy[1] = 0;
        CHECK(std::abs(*roc_auc(yy, ss) - pairwise_auc(yy, ss)) < 1e-9);
    }
    CHECK_FALSE(roc_auc(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.4}).has_value());
}

TEST_CASE("ROC curve runs corner to corner and integrates to the AUC") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u;
    std::vector<int> y(300);
    std::vector<double> s(300);
    for (std::size_t i = 0; i < 300; ++i) {
        y[i] = u(rng) < 0.3;
        s[i] = std::round((u(rng) + 0.3 * y[i]) * 20) / 20;
    }
    const auto roc = roc_curve(y, s);
    CHECK(roc.front().x == 0.0);
    CHECK(roc.front().y == 0.0);
    CHECK(roc.back().x == 1.0);
    CHECK(roc.back().y == 1.0);
    double area = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i) area += (roc[i].x - roc[i - 1].x) * (roc[i].y + roc[i - 1].y) / 2.0;
    CHECK(area == doctest::Approx(*roc_auc(y, s)).epsilon(1e-12));
}

TEST_CASE("precision-recall curve extremes") {
    const std::vector<int> y = {0, 0, 1, 0, 1, 1};
    const std::vector<double> perfect = {0.1, 0.2, 0.9, 0.3, 0.8, 0.7};
    CHECK(average_precision(y, perfect) == doctest::Approx(1.0));
    const auto pts = pr_curve(y, perfect);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].x >= pts[i - 1].x);

    const std::vector<double> flat(6, 0.5);
    const auto one = pr_curve(y, flat);
    REQUIRE(one.size() == 1);
    CHECK(one[0].x == 1.0);
    CHECK(one[0].y == doctest::Approx(0.5));
    CHECK_THROWS_AS(pr_curve(std::vector<int>{0, 0}, std::vector<double>{0.1, 0.2}), CurveError);
}

TEST_CASE("random scores give average precision near prevalence") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u;
    std::vector<int> y(5000);
    std::vector<double> s(5000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = i % 50 < 3;
        s[i] = u(rng);
    }
    CHECK(std::abs(average_precision(y, s) - 0.06) < 0.03);
    CHECK(std::abs(*roc_auc(y, s) - 0.5) < 0.05);
}

TEST_CASE("run aggregation") {
    const auto s = summarize_metric(std::vector<double>{0.7, 0.9});
    CHECK(s.mean == doctest::Approx(0.8));
    CHECK(s.sd == doctest::Approx(0.141421356).epsilon(1e-8));
    CHECK(s.format() == "0.800(0.141)");
    const auto single = summarize_metric(std::vector<double>{0.25});
    CHECK(single.sd == 0.0);
    const auto skip = summarize_metric(std::vector<double>{NAN, 0.5, 0.7});
    CHECK(skip.count == 2);
    CHECK(skip.mean == doctest::Approx(0.6));
    CHECK(summarize_metric(std::vector<double>{NAN}).format() == "nan (nan)");

    std::vector<EvaluationReport> reports(2);
    reports[0].accuracy = 0.7;
    reports[1].accuracy = 0.9;
    reports[0].auc = 0.6;
    const auto agg = aggregate_runs(reports);
    CHECK(agg.runs == 2);
    CHECK(agg.accuracy.mean == doctest::Approx(0.8));
    CHECK(agg.auc.count == 1);
    CHECK_THROWS_AS(aggregate_runs(std::span<const EvaluationReport>{}), InputError);
}

TEST_CASE("mismatched lengths are rejected") {
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{1, 0}, std::vector<int>{1}), InputError);
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{2}, std::vector<int>{1}), InputError);
}
