#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace stinger {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const int> actual, std::span<const int> predicted);

// Zero denominators give 0.
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

/// Same matrix with the roles of the two classes swapped.
ConfusionMatrix flipped(const ConfusionMatrix& cm);

/// Rank statistic with midranks for ties; empty when a class is absent.
std::optional<double> roc_auc(std::span<const int> actual, std::span<const double> scores);

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

/// (recall, precision) at every distinct score threshold, recall ascending.
std::vector<CurvePoint> pr_curve(std::span<const int> actual, std::span<const double> scores);
/// (false positive rate, true positive rate) from (0,0) to (1,1).
std::vector<CurvePoint> roc_curve(std::span<const int> actual, std::span<const double> scores);
/// Step-wise sum of precision times recall increments.
double average_precision(std::span<const int> actual, std::span<const double> scores);

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvaluationReport {
    ConfusionMatrix cm;
    double accuracy = 0.0;
    std::optional<double> auc;
    ClassMetrics absence;
    ClassMetrics presence;
    std::vector<CurvePoint> pr;   // empty when a class is absent
    std::vector<CurvePoint> roc;

    /// Presence-class F1, the headline metric.
    double f1() const { return presence.f1; }
};

EvaluationReport evaluate(std::span<const int> actual, std::span<const int> predicted,
                          std::span<const double> scores);

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const EvaluationReport& report, bool with_curves = true);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;  // runs with a defined value

    /// "mean(sd)" with three decimals; "nan (nan)" when no run had a value.
    std::string format() const;
};

/// Mean and sample SD (divisor n-1, 0 for one run). NaN entries are skipped.
MetricSummary summarize_metric(std::span<const double> values);

struct RunAggregate {
    std::size_t runs = 0;
    MetricSummary accuracy;
    MetricSummary f1;
    MetricSummary auc;
    MetricSummary precision;
    MetricSummary recall;
};

RunAggregate aggregate_runs(std::span<const EvaluationReport> reports);
nlohmann::json to_json(const RunAggregate& agg);

}  // namespace stinger
