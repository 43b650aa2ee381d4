#include "stinger/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "stinger/circular.hpp"
#include "stinger/csv.hpp"
#include "stinger/encoding.hpp"
#include "stinger/error.hpp"

namespace stinger {

PcaModel pca_fit(const Matrix& rows, std::size_t n_components) {
    if (rows.rows() < 2) throw DataError("PCA needs at least 2 rows");
    const auto d = rows.cols();
    n_components = std::min<std::size_t>(n_components, static_cast<std::size_t>(d));
    PcaModel m;
    m.mean = rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = rows.rowwise() - m.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
    m.total_variance = cov.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();
    m.axes.resize(static_cast<Eigen::Index>(n_components), d);
    m.explained_variance.resize(static_cast<Eigen::Index>(n_components));
    for (std::size_t k = 0; k < n_components; ++k) {
        const Eigen::Index src = d - 1 - static_cast<Eigen::Index>(k);
        Eigen::VectorXd axis = vectors.col(src);
        Eigen::Index big = 0;
        axis.cwiseAbs().maxCoeff(&big);
        if (axis[big] < 0.0) axis = -axis;
        m.axes.row(static_cast<Eigen::Index>(k)) = axis.transpose();
        m.explained_variance[static_cast<Eigen::Index>(k)] = std::max(0.0, values[src]);
    }
    return m;
}

Matrix PcaModel::transform(const Matrix& rows) const {
    if (rows.cols() != mean.size()) throw ContractError("row width does not match the PCA model");
    return (rows.rowwise() - mean.transpose()) * axes.transpose();
}

Matrix PcaModel::inverse_transform(const Matrix& scores) const {
    Matrix out = scores * axes;
    out.rowwise() += mean.transpose();
    return out;
}

std::vector<double> PcaModel::explained_ratio() const {
    std::vector<double> out(static_cast<std::size_t>(explained_variance.size()));
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = total_variance > 0.0 ? explained_variance[static_cast<Eigen::Index>(k)] / total_variance : 0.0;
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("columns differ in length");
    if (a.size() < 2) throw DataError("correlation needs at least 2 rows");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

Matrix pearson_matrix(const Matrix& columns) {
    const auto d = columns.cols();
    Matrix out(d, d);
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::VectorXd c = columns.col(j);
        cols[static_cast<std::size_t>(j)].assign(c.data(), c.data() + c.size());
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            double r = pearson(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
            if (i == j && !std::isnan(r)) r = 1.0;
            out(i, j) = out(j, i) = r;
        }
    }
    return out;
}

double point_biserial(std::span<const int> binary, std::span<const double> values) {
    if (binary.size() != values.size()) throw InputError("columns differ in length");
    std::vector<double> coded(binary.size());
    for (std::size_t i = 0; i < binary.size(); ++i) {
        if (binary[i] != 0 && binary[i] != 1) throw InputError("binary column must hold 0 or 1");
        coded[i] = binary[i];
    }
    return pearson(coded, values);
}

std::vector<double> Histogram::centers() const {
    std::vector<double> out;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) out.push_back(0.5 * (edges[b] + edges[b + 1]));
    return out;
}

std::vector<double> Histogram::density() const {
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    std::vector<double> out(counts.size(), 0.0);
    if (n == 0.0) return out;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double w = edges[b + 1] - edges[b];
        out[b] = w > 0.0 ? static_cast<double>(counts[b]) / (n * w) : 0.0;
    }
    return out;
}

Histogram linear_histogram(std::span<const double> values, std::size_t bins) {
    if (bins < 1) throw ParameterError("histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    double lo = 0.0, hi = 1.0;
    if (!values.empty()) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
    }
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + w * static_cast<double>(b));
    h.edges.back() = hi;
    for (double v : values) {
        auto b = static_cast<std::size_t>(std::floor((v - lo) / w));
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

Histogram circular_histogram(std::span<const double> degrees, std::size_t bins) {
    if (bins < 1) throw ParameterError("histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    const double w = 360.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(w * static_cast<double>(b));
    for (double v : degrees) {
        auto b = static_cast<std::size_t>(std::floor(circular::wrap_degrees(v) / w));
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

Seasonality monthly_presence_counts(const Dataset& data) {
    const auto months = data.schema().indices_of(FeatureKind::month);
    if (months.empty() && !data.has_dates()) throw SchemaError("seasonality needs a month feature or dates");
    Seasonality s;
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (data.labels()[r] != 1) continue;
        const int m = !months.empty() ? static_cast<int>(data.cell(r, months.front())) : month_of(data.dates()[r]);
        if (m < 1 || m > 12) throw InputError("month out of range");
        s.monthly[static_cast<std::size_t>(m - 1)]++;
        if (data.has_dates()) {
            const std::string beach = data.has_beaches() ? data.beaches()[r] : std::string("All");
            s.beach_year[{beach, year_of(data.dates()[r])}]++;
        }
    }
    return s;
}

PlotExporter::PlotExporter(std::filesystem::path dir, std::string strategy, std::string model)
    : dir_(std::move(dir)), strategy_(std::move(strategy)), model_(std::move(model)) {}

std::filesystem::path PlotExporter::path(std::string_view artifact) const {
    return dir_ / (std::string(artifact) + "__" + strategy_ + "__" + model_ + ".csv");
}

namespace {

std::string num(double v) { return csv::format_number(v); }

std::filesystem::path write_table(const std::filesystem::path& p, std::vector<std::string> header,
                                  const std::vector<std::vector<std::string>>& rows) {
    csv::Table t;
    t.header = std::move(header);
    t.rows = rows;
    csv::write(p, t);
    return p;
}

}  // namespace

std::filesystem::path PlotExporter::density(std::string_view artifact, const Histogram& h) const {
    std::vector<std::vector<std::string>> rows;
    const auto c = h.centers();
    const auto d = h.density();
    for (std::size_t b = 0; b < c.size(); ++b) rows.push_back({num(c[b]), num(d[b])});
    return write_table(path(artifact), {"bin_center", "density"}, rows);
}

std::filesystem::path PlotExporter::circular(std::string_view artifact, const Histogram& h) const {
    std::vector<std::vector<std::string>> rows;
    const auto c = h.centers();
    for (std::size_t b = 0; b < c.size(); ++b) rows.push_back({num(c[b]), std::to_string(h.counts[b])});
    return write_table(path(artifact), {"bin_center_deg", "count"}, rows);
}

std::filesystem::path PlotExporter::pca_scatter(std::string_view artifact, const Matrix& scores,
                                                std::span<const int> labels) const {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index r = 0; r < scores.rows(); ++r)
        rows.push_back({num(scores(r, 0)), num(scores.cols() > 1 ? scores(r, 1) : 0.0),
                        std::to_string(labels[static_cast<std::size_t>(r)])});
    return write_table(path(artifact), {"pc1", "pc2", "class"}, rows);
}

std::filesystem::path PlotExporter::curve(std::string_view artifact, const std::vector<CurvePoint>& pts,
                                          std::string_view x_name, std::string_view y_name) const {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : pts) rows.push_back({num(p.x), num(p.y)});
    return write_table(path(artifact), {std::string(x_name), std::string(y_name)}, rows);
}

std::filesystem::path PlotExporter::importance(std::string_view artifact, const std::vector<std::string>& names,
                                               const std::vector<double>& scores) const {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < names.size(); ++i) rows.push_back({names[i], num(scores[i])});
    return write_table(path(artifact), {"feature", "score"}, rows);
}

std::filesystem::path PlotExporter::pairs(std::string_view artifact, const Dataset& data) const {
    std::vector<std::string> header;
    std::vector<std::size_t> cols;
    for (std::size_t f = 0; f < data.schema().size(); ++f) {
        if (data.schema()[f].is_discrete()) continue;
        header.push_back(data.schema()[f].name);
        cols.push_back(f);
    }
    header.push_back("presence");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < data.size(); ++r) {
        std::vector<std::string> row;
        for (auto f : cols) row.push_back(num(data.cell(r, f)));
        row.push_back(std::to_string(data.labels()[r]));
        rows.push_back(std::move(row));
    }
    return write_table(path(artifact), header, rows);
}

void export_exploration(const Dataset& data, const std::filesystem::path& dir, std::string_view strategy,
                        std::string_view model) {
    PlotExporter ex(dir, std::string(strategy), std::string(model));
    const auto& schema = data.schema();
    const Dataset pos = data.filter_label(1), neg = data.filter_label(0);
    auto column = [](const Dataset& d, std::size_t f) {
        std::vector<double> v(d.size());
        for (std::size_t r = 0; r < d.size(); ++r) v[r] = d.cell(r, f);
        return v;
    };

    std::vector<std::size_t> continuous;
    for (std::size_t f = 0; f < schema.size(); ++f) {
        const auto& spec = schema[f];
        if (spec.kind == FeatureKind::continuous) {
            continuous.push_back(f);
            ex.density("density_" + spec.name, linear_histogram(column(data, f)));
            ex.density("density_" + spec.name + "_presence", linear_histogram(column(pos, f)));
            ex.density("density_" + spec.name + "_absence", linear_histogram(column(neg, f)));
        } else if (spec.kind == FeatureKind::circular_degrees) {
            ex.circular("circular_" + spec.name + "_presence", circular_histogram(column(pos, f)));
            ex.circular("circular_" + spec.name + "_absence", circular_histogram(column(neg, f)));
        }
    }

    if (continuous.size() >= 2 && data.size() >= 2) {
        Matrix cols(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(continuous.size()));
        for (std::size_t k = 0; k < continuous.size(); ++k)
            for (std::size_t r = 0; r < data.size(); ++r)
                cols(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = data.cell(r, continuous[k]);
        const Matrix corr = pearson_matrix(cols);
        std::vector<std::string> header = {"feature"};
        for (auto f : continuous) header.push_back(schema[f].name);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < continuous.size(); ++i) {
            std::vector<std::string> row = {schema[continuous[i]].name};
            for (std::size_t j = 0; j < continuous.size(); ++j)
                row.push_back(num(corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
            rows.push_back(std::move(row));
        }
        write_table(ex.path("pearson"), header, rows);
    }

    if (data.count(0) > 0 && data.count(1) > 0) {
        std::vector<std::string> names;
        std::vector<double> r;
        for (std::size_t f = 0; f < schema.size(); ++f) {
            if (schema[f].is_discrete()) continue;
            names.push_back(schema[f].name);
            r.push_back(point_biserial(data.labels(), column(data, f)));
        }
        ex.importance("point_biserial", names, r);
    }

    if (!schema.indices_of(FeatureKind::month).empty() || data.has_dates()) {
        const auto s = monthly_presence_counts(data);
        std::vector<std::vector<std::string>> rows;
        for (int m = 1; m <= 12; ++m)
            rows.push_back({std::string(month_name(m)), std::to_string(s.monthly[static_cast<std::size_t>(m - 1)])});
        write_table(ex.path("monthly_presence"), {"month", "presence"}, rows);
        if (!s.beach_year.empty()) {
            std::vector<std::vector<std::string>> by;
            for (const auto& [key, count] : s.beach_year)
                by.push_back({key.first, std::to_string(key.second), std::to_string(count)});
            write_table(ex.path("yearly_presence"), {"beach", "year", "presence"}, by);
        }
    }

    if (data.size() >= 2) {
        const Encoder enc = Encoder::fit(data, Encoding::raw);
        const Matrix x = enc.transform(data);
        const PcaModel pca = pca_fit(x, 2);
        ex.pca_scatter("pca", pca.transform(x), data.labels());
    }
    ex.pairs("pairs", data);
}

}  // namespace stinger
