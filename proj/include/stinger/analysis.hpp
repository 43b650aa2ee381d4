#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stinger/metrics.hpp"
#include "stinger/schema.hpp"

namespace stinger {

struct PcaModel {
    Eigen::VectorXd mean;
    Matrix axes;  // one orthonormal axis per row, by decreasing variance
    Eigen::VectorXd explained_variance;
    double total_variance = 0.0;

    /// Centred rows projected onto the axes.
    Matrix transform(const Matrix& rows) const;
    Matrix inverse_transform(const Matrix& scores) const;
    std::vector<double> explained_ratio() const;
};

/// Eigen-decomposition of the sample covariance (divisor n-1). Each axis is
/// signed so that its largest-magnitude coordinate is positive.
PcaModel pca_fit(const Matrix& rows, std::size_t n_components = 2);

/// Pearson r between columns; NaN where a column has zero variance.
Matrix pearson_matrix(const Matrix& columns);
double pearson(std::span<const double> a, std::span<const double> b);
/// Pearson r with 0/1 coding of `binary`; NaN if it takes a single value.
double point_biserial(std::span<const int> binary, std::span<const double> values);

struct Histogram {
    std::vector<double> edges;   // bins + 1
    std::vector<std::size_t> counts;
    std::vector<double> centers() const;
    /// Counts divided by (n * width); sums to 1 when multiplied by widths.
    std::vector<double> density() const;
};

Histogram linear_histogram(std::span<const double> values, std::size_t bins = 30);
/// Equal sectors starting at 0 degrees.
Histogram circular_histogram(std::span<const double> degrees, std::size_t bins = 16);

struct Seasonality {
    std::array<std::size_t, 12> monthly{};  // presence rows per calendar month
    std::map<std::pair<std::string, int>, std::size_t> beach_year;  // presence rows per (beach, year)
};

Seasonality monthly_presence_counts(const Dataset& data);

/// Delimited exports named `<artifact>__<strategy>__<model>.csv` under `dir`.
class PlotExporter {
public:
    PlotExporter(std::filesystem::path dir, std::string strategy, std::string model);

    std::filesystem::path path(std::string_view artifact) const;

    std::filesystem::path density(std::string_view artifact, const Histogram& h) const;
    std::filesystem::path circular(std::string_view artifact, const Histogram& h) const;
    std::filesystem::path pca_scatter(std::string_view artifact, const Matrix& scores, std::span<const int> labels) const;
    std::filesystem::path curve(std::string_view artifact, const std::vector<CurvePoint>& pts,
                                std::string_view x_name, std::string_view y_name) const;
    std::filesystem::path importance(std::string_view artifact, const std::vector<std::string>& names,
                                     const std::vector<double>& scores) const;
    /// Continuous and circular columns with the label, one row per observation.
    std::filesystem::path pairs(std::string_view artifact, const Dataset& data) const;

private:
    std::filesystem::path dir_;
    std::string strategy_;
    std::string model_;
};

/// Full exploratory bundle for a dataset: densities per continuous feature
/// and class, circular histograms per direction feature and class, Pearson
/// matrix, point-biserial correlations, seasonality and a PCA scatter.
void export_exploration(const Dataset& data, const std::filesystem::path& dir, std::string_view strategy = "data",
                        std::string_view model = "none");

}  // namespace stinger
