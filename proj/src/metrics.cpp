#include "stinger/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "stinger/error.hpp"

namespace stinger {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_labels(std::span<const int> labels) {
    for (int v : labels)
        if (v != 0 && v != 1) throw InputError("labels must be 0 or 1");
}

void check_scores(std::span<const int> actual, std::span<const double> scores) {
    if (actual.size() != scores.size()) throw InputError("label and score counts differ");
    check_labels(actual);
    for (double s : scores)
        if (!std::isfinite(s)) throw InputError("scores must be finite");
}

struct Counts {
    double tp = 0.0, fp = 0.0;
};

// cumulative (tp, fp) after each distinct threshold, scores descending
std::vector<Counts> threshold_counts(std::span<const int> actual, std::span<const double> scores) {
    std::vector<std::size_t> order(actual.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    std::vector<Counts> out;
    Counts c;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (actual[order[k]] == 1) c.tp += 1.0;
        else c.fp += 1.0;
        if (k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]]) out.push_back(c);
    }
    return out;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> actual, std::span<const int> predicted) {
    if (actual.size() != predicted.size()) throw InputError("actual and predicted lengths differ");
    check_labels(actual);
    check_labels(predicted);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 1) (predicted[i] == 1 ? cm.tp : cm.fn)++;
        else (predicted[i] == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

double precision(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fp); }
double recall(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fn); }

double f1(const ConfusionMatrix& cm) { return ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn); }

double accuracy(const ConfusionMatrix& cm) { return ratio(cm.tp + cm.tn, cm.total()); }

ConfusionMatrix flipped(const ConfusionMatrix& cm) { return {cm.tn, cm.tp, cm.fn, cm.fp}; }

std::optional<double> roc_auc(std::span<const int> actual, std::span<const double> scores) {
    check_scores(actual, scores);
    const auto n = actual.size();
    const double pos = static_cast<double>(std::count(actual.begin(), actual.end(), 1));
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0.0 || neg == 0.0) return std::nullopt;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (actual[order[k]] == 1) rank_sum += mid;
        i = j + 1;
    }
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

std::vector<CurvePoint> pr_curve(std::span<const int> actual, std::span<const double> scores) {
    check_scores(actual, scores);
    const double pos = static_cast<double>(std::count(actual.begin(), actual.end(), 1));
    if (pos == 0.0 || pos == static_cast<double>(actual.size()))
        throw CurveError("precision-recall curve needs both classes");
    std::vector<CurvePoint> out;
    for (const auto& c : threshold_counts(actual, scores)) out.push_back({c.tp / pos, c.tp / (c.tp + c.fp)});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    return out;
}

std::vector<CurvePoint> roc_curve(std::span<const int> actual, std::span<const double> scores) {
    check_scores(actual, scores);
    const double pos = static_cast<double>(std::count(actual.begin(), actual.end(), 1));
    const double neg = static_cast<double>(actual.size()) - pos;
    if (pos == 0.0 || neg == 0.0) throw CurveError("ROC curve needs both classes");
    std::vector<CurvePoint> out = {{0.0, 0.0}};
    for (const auto& c : threshold_counts(actual, scores)) out.push_back({c.fp / neg, c.tp / pos});
    return out;
}

double average_precision(std::span<const int> actual, std::span<const double> scores) {
    const auto curve = pr_curve(actual, scores);
    double ap = 0.0, prev_recall = 0.0;
    for (const auto& p : curve) {
        ap += (p.x - prev_recall) * p.y;
        prev_recall = p.x;
    }
    return ap;
}

EvaluationReport evaluate(std::span<const int> actual, std::span<const int> predicted,
                          std::span<const double> scores) {
    EvaluationReport r;
    r.cm = confusion_matrix(actual, predicted);
    r.accuracy = accuracy(r.cm);
    r.auc = roc_auc(actual, scores);
    const auto neg = flipped(r.cm);
    r.presence = {"Presence", precision(r.cm), recall(r.cm), f1(r.cm), r.cm.tp + r.cm.fn};
    r.absence = {"Absence", precision(neg), recall(neg), f1(neg), r.cm.tn + r.cm.fp};
    if (r.auc) {
        r.pr = pr_curve(actual, scores);
        r.roc = roc_curve(actual, scores);
    }
    return r;
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

namespace {

nlohmann::json class_json(const ClassMetrics& c) {
    return {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
}

nlohmann::json curve_json(const std::vector<CurvePoint>& pts) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : pts) out.push_back({p.x, p.y});
    return out;
}

}  // namespace

nlohmann::json to_json(const EvaluationReport& r, bool with_curves) {
    nlohmann::json j = {{"confusion_matrix", to_json(r.cm)},
                        {"accuracy", r.accuracy},
                        {"auc", r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr)},
                        {"f1", r.presence.f1},
                        {"classes", {{"Absence", class_json(r.absence)}, {"Presence", class_json(r.presence)}}}};
    if (with_curves) {
        j["pr_curve"] = curve_json(r.pr);
        j["roc_curve"] = curve_json(r.roc);
    }
    return j;
}

std::string MetricSummary::format() const {
    if (count == 0) return "nan (nan)";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f(%.3f)", mean, sd);
    return buf;
}

MetricSummary summarize_metric(std::span<const double> values) {
    MetricSummary s;
    double sum = 0.0;
    for (double v : values)
        if (!std::isnan(v)) {
            sum += v;
            ++s.count;
        }
    if (s.count == 0) {
        s.mean = s.sd = std::nan("");
        return s;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values)
            if (!std::isnan(v)) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    return s;
}

RunAggregate aggregate_runs(std::span<const EvaluationReport> reports) {
    if (reports.empty()) throw InputError("aggregation needs at least one run");
    RunAggregate a;
    a.runs = reports.size();
    std::vector<double> acc, f, auc, p, r;
    for (const auto& rep : reports) {
        acc.push_back(rep.accuracy);
        f.push_back(rep.presence.f1);
        auc.push_back(rep.auc ? *rep.auc : std::nan(""));
        p.push_back(rep.presence.precision);
        r.push_back(rep.presence.recall);
    }
    a.accuracy = summarize_metric(acc);
    a.f1 = summarize_metric(f);
    a.auc = summarize_metric(auc);
    a.precision = summarize_metric(p);
    a.recall = summarize_metric(r);
    return a;
}

namespace {

nlohmann::json summary_json(const MetricSummary& s) {
    if (s.count == 0) return {{"mean", nullptr}, {"sd", nullptr}, {"text", s.format()}};
    return {{"mean", s.mean}, {"sd", s.sd}, {"text", s.format()}};
}

}  // namespace

nlohmann::json to_json(const RunAggregate& a) {
    return {{"runs", a.runs},
            {"accuracy", summary_json(a.accuracy)},
            {"f1", summary_json(a.f1)},
            {"auc", summary_json(a.auc)},
            {"precision", summary_json(a.precision)},
            {"recall", summary_json(a.recall)}};
}

}  // namespace stinger
