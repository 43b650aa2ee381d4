#include "stinger/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "stinger/csv.hpp"
#include "stinger/error.hpp"

namespace stinger {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::continuous: return "continuous";
        case FeatureKind::circular_degrees: return "circular_degrees";
        case FeatureKind::categorical: return "categorical";
        case FeatureKind::month: return "month";
    }
    return "unknown";
}

FeatureKind parse_feature_kind(std::string_view text) {
    if (text == "continuous") return FeatureKind::continuous;
    if (text == "circular_degrees" || text == "circular") return FeatureKind::circular_degrees;
    if (text == "categorical") return FeatureKind::categorical;
    if (text == "month") return FeatureKind::month;
    throw SchemaError("unknown feature kind '" + std::string(text) + "'");
}

std::size_t FeatureSpec::cardinality() const {
    switch (kind) {
        case FeatureKind::month: return 12;
        case FeatureKind::categorical: return categories.size();
        default: return 0;
    }
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
    std::set<std::string> seen;
    for (const auto& f : features_) {
        if (f.name.empty()) throw SchemaError("feature with empty name");
        if (!seen.insert(f.name).second) throw SchemaError("duplicate feature '" + f.name + "'");
    }
}

FeatureSchema FeatureSchema::study() {
    return FeatureSchema({
        {"sst_c", FeatureKind::continuous, "°C", {}},
        {"wind_dir_deg", FeatureKind::circular_degrees, "degrees", {}},
        {"wind_speed_ms", FeatureKind::continuous, "m s⁻¹", {}},
        {"curr_dir_deg", FeatureKind::circular_degrees, "degrees", {}},
        {"curr_speed_ms", FeatureKind::continuous, "m s⁻¹", {}},
        {"month", FeatureKind::month, "", {}},
    });
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> FeatureSchema::indices_of(FeatureKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].kind == kind) out.push_back(i);
    }
    return out;
}

// ---- Dataset ---------------------------------------------------------------

Dataset::Dataset(FeatureSchema schema, Matrix cells, std::vector<int> labels,
                 std::vector<std::string> beaches, std::vector<std::string> dates,
                 std::vector<Origin> origins)
    : schema_(std::move(schema)),
      cells_(std::move(cells)),
      labels_(std::move(labels)),
      beaches_(std::move(beaches)),
      dates_(std::move(dates)),
      origins_(std::move(origins)) {
    const auto n = labels_.size();
    if (static_cast<std::size_t>(cells_.rows()) != n)
        throw ContractError("row count does not match label count");
    if (static_cast<std::size_t>(cells_.cols()) != schema_.size())
        throw ContractError("cell width does not match schema");
    for (int y : labels_) {
        if (y != 0 && y != 1) throw LabelError("label outside {0,1}");
    }
    if (!beaches_.empty() && beaches_.size() != n) throw ContractError("beach column length mismatch");
    if (!dates_.empty() && dates_.size() != n) throw ContractError("date column length mismatch");
    if (origins_.empty()) origins_.assign(n, Origin::real);
    if (origins_.size() != n) throw ContractError("origin column length mismatch");
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Matrix cells(static_cast<Eigen::Index>(rows.size()), cells_.cols());
    std::vector<int> labels;
    std::vector<std::string> beaches, dates;
    std::vector<Origin> origins;
    labels.reserve(rows.size());
    origins.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        if (r >= size()) throw ContractError("row index out of range");
        cells.row(static_cast<Eigen::Index>(i)) = cells_.row(static_cast<Eigen::Index>(r));
        labels.push_back(labels_[r]);
        origins.push_back(origins_[r]);
        if (has_beaches()) beaches.push_back(beaches_[r]);
        if (has_dates()) dates.push_back(dates_[r]);
    }
    return Dataset(schema_, std::move(cells), std::move(labels), std::move(beaches),
                   std::move(dates), std::move(origins));
}

Dataset Dataset::filter_label(int label) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
        if (labels_[i] == label) rows.push_back(i);
    }
    return subset(rows);
}

Dataset Dataset::with_origin(Origin origin) const {
    Dataset out = *this;
    out.origins_.assign(size(), origin);
    return out;
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
    if (!(a.schema_ == b.schema_)) throw ContractError("cannot concatenate datasets with different schemas");
    Matrix cells(static_cast<Eigen::Index>(a.size() + b.size()), a.cells_.cols());
    if (a.size()) cells.topRows(static_cast<Eigen::Index>(a.size())) = a.cells_;
    if (b.size()) cells.bottomRows(static_cast<Eigen::Index>(b.size())) = b.cells_;
    auto join = [](const auto& x, const auto& y) {
        auto out = x;
        out.insert(out.end(), y.begin(), y.end());
        return out;
    };
    const bool beaches = (a.has_beaches() || a.empty()) && (b.has_beaches() || b.empty()) &&
                         (a.has_beaches() || b.has_beaches());
    const bool dates = (a.has_dates() || a.empty()) && (b.has_dates() || b.empty()) &&
                       (a.has_dates() || b.has_dates());
    return Dataset(a.schema_, std::move(cells), join(a.labels_, b.labels_),
                   beaches ? join(a.beaches_, b.beaches_) : std::vector<std::string>{},
                   dates ? join(a.dates_, b.dates_) : std::vector<std::string>{},
                   join(a.origins_, b.origins_));
}

// ---- loading ---------------------------------------------------------------

namespace {

const std::set<std::string>& location_columns() {
    static const std::set<std::string> cols = {
        "beach_key", "beach_id", "latitude", "longitude", "lat", "lon", "orientation",
        "embaymentisation", "surf_club", "slsa", "state", "length", "council", "council_report"};
    return cols;
}

bool is_missing(std::string_view s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

void emit_warning(const LoadOptions& options, const std::string& message) {
    if (options.warn) {
        options.warn(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

}  // namespace

Dataset parse_observations(const std::string& text, const FeatureSchema& schema,
                           const LoadOptions& options) {
    const csv::Table table = csv::parse(text);
    if (table.header.empty()) throw InputError("missing header row");

    const int label_col = table.column(options.label_column);
    if (label_col < 0) throw SchemaError("missing column '" + options.label_column + "'");
    const int beach_col = table.column("beach");
    const int date_col = table.column("date");
    const int origin_col = table.column("origin");

    std::vector<int> feature_cols(schema.size(), -1);
    std::set<std::string> used = {options.label_column, "beach", "date", "origin"};
    for (std::size_t j = 0; j < schema.size(); ++j) {
        const auto& f = schema[j];
        feature_cols[j] = table.column(f.name);
        if (feature_cols[j] < 0 && !(f.kind == FeatureKind::month && date_col >= 0))
            throw SchemaError("missing column '" + f.name + "'");
        used.insert(f.name);
    }
    std::vector<std::string> ignored;
    for (const auto& h : table.header) {
        if (!used.count(h)) ignored.push_back(h);
    }
    if (!ignored.empty()) {
        std::string msg = "ignoring columns:";
        for (const auto& h : ignored) msg += " " + h + (location_columns().count(h) ? " (location)" : "");
        emit_warning(options, msg);
    }

    // Categorical vocabularies: declared categories are authoritative, otherwise
    // learned from the file in sorted order.
    std::vector<FeatureSpec> specs(schema.begin(), schema.end());
    for (std::size_t j = 0; j < specs.size(); ++j) {
        if (specs[j].kind != FeatureKind::categorical || !specs[j].categories.empty()) continue;
        std::set<std::string> values;
        for (const auto& row : table.rows) {
            const auto c = static_cast<std::size_t>(feature_cols[j]);
            if (c < row.size() && !is_missing(row[c])) values.insert(row[c]);
        }
        specs[j].categories.assign(values.begin(), values.end());
    }

    std::vector<std::vector<double>> kept;
    std::vector<int> labels;
    std::vector<std::string> beaches, dates;
    std::vector<Origin> origins;
    std::size_t dropped = 0;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size())
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(row.size()),
                             r);
        auto field = [&](int c) -> std::string_view { return row[static_cast<std::size_t>(c)]; };

        bool incomplete = is_missing(field(label_col));
        for (std::size_t j = 0; j < specs.size() && !incomplete; ++j) {
            const int c = feature_cols[j] >= 0 ? feature_cols[j] : date_col;
            incomplete = is_missing(field(c));
        }
        if (incomplete) {
            if (options.drop_incomplete_rows) {
                ++dropped;
                continue;
            }
            throw ParseError("missing value", r);
        }

        const auto label = parse_double(field(label_col));
        if (!label || (*label != 0.0 && *label != 1.0))
            throw LabelError("label '" + std::string(field(label_col)) + "' outside {0,1} (row " +
                             std::to_string(r) + ")");

        std::vector<double> values(specs.size());
        for (std::size_t j = 0; j < specs.size(); ++j) {
            const auto& f = specs[j];
            switch (f.kind) {
                case FeatureKind::continuous:
                case FeatureKind::circular_degrees: {
                    const auto v = parse_double(field(feature_cols[j]));
                    if (!v) throw ParseError("non-numeric value in column '" + f.name + "'", r);
                    values[j] = *v;
                    break;
                }
                case FeatureKind::categorical: {
                    const auto s = field(feature_cols[j]);
                    const auto it = std::find(f.categories.begin(), f.categories.end(), s);
                    if (it == f.categories.end())
                        throw ParseError("unknown category '" + std::string(s) + "' in column '" + f.name + "'", r);
                    values[j] = static_cast<double>(it - f.categories.begin());
                    break;
                }
                case FeatureKind::month: {
                    int m = 0;
                    if (feature_cols[j] >= 0) {
                        const auto v = parse_double(field(feature_cols[j]));
                        if (!v || *v != std::floor(*v)) throw ParseError("non-integer month", r);
                        m = static_cast<int>(*v);
                    } else {
                        try {
                            m = month_of(field(date_col));
                        } catch (const InputError& e) {
                            throw ParseError(e.what(), r);
                        }
                    }
                    if (m < 1 || m > 12) throw ParseError("month outside 1..12", r);
                    values[j] = m;
                    break;
                }
            }
        }
        kept.push_back(std::move(values));
        labels.push_back(static_cast<int>(*label));
        if (beach_col >= 0) beaches.emplace_back(field(beach_col));
        if (date_col >= 0) dates.emplace_back(field(date_col));
        if (origin_col >= 0) origins.push_back(field(origin_col) == "synthetic" ? Origin::synthetic : Origin::real);
    }
    if (dropped) emit_warning(options, "dropped " + std::to_string(dropped) + " incomplete rows");

    Matrix cells(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(specs.size()));
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = 0; j < specs.size(); ++j)
            cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i][j];
    return Dataset(FeatureSchema(std::move(specs)), std::move(cells), std::move(labels),
                   std::move(beaches), std::move(dates), std::move(origins));
}

Dataset load_observations(const std::filesystem::path& path, const FeatureSchema& schema,
                          const LoadOptions& options) {
    if (!std::filesystem::exists(path)) throw InputError("no such file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_observations(buffer.str(), schema, options);
}

void write_observations(const std::filesystem::path& path, const Dataset& data, bool with_origin) {
    csv::Table table;
    if (data.has_dates()) table.header.push_back("date");
    if (data.has_beaches()) table.header.push_back("beach");
    table.header.push_back("presence");
    for (const auto& f : data.schema()) {
        // a month derived from the date stays implicit
        if (f.kind == FeatureKind::month && data.has_dates() && f.name == "month") continue;
        table.header.push_back(f.name);
    }
    if (with_origin) table.header.push_back("origin");

    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<std::string> row;
        if (data.has_dates()) row.push_back(data.dates()[i]);
        if (data.has_beaches()) row.push_back(data.beaches()[i]);
        row.push_back(std::to_string(data.labels()[i]));
        for (std::size_t j = 0; j < data.schema().size(); ++j) {
            const auto& f = data.schema()[j];
            const double v = data.cell(i, j);
            if (f.kind == FeatureKind::month && data.has_dates() && f.name == "month") continue;
            if (f.kind == FeatureKind::categorical) {
                row.push_back(f.categories.at(static_cast<std::size_t>(v)));
            } else if (f.kind == FeatureKind::month) {
                row.push_back(std::to_string(static_cast<int>(v)));
            } else {
                row.push_back(csv::format_number(v));
            }
        }
        if (with_origin) row.push_back(data.origins()[i] == Origin::synthetic ? "synthetic" : "real");
        table.rows.push_back(std::move(row));
    }
    csv::write(path, table);
}

// ---- discretization --------------------------------------------------------

const std::vector<std::string>& default_level_labels() {
    static const std::vector<std::string> labels = {"Low", "Medium", "High", "Very High"};
    return labels;
}

std::size_t DiscretizationRule::bin_index(double value) const {
    const auto it = std::upper_bound(edges.begin(), edges.end(), value);
    const auto pos = static_cast<long>(it - edges.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<long>(pos, 0, static_cast<long>(labels.size()) - 1));
}

DiscretizationRule fit_discretization(std::span<const double> values, std::size_t n_bins,
                                      std::vector<std::string> labels, std::string source) {
    if (values.empty()) throw DataError("cannot discretize an empty column");
    if (n_bins == 0 || labels.size() != n_bins)
        throw ParameterError("bin count must equal the number of labels");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) throw DataError("degenerate range: all values identical");

    DiscretizationRule rule{std::move(source), std::move(labels), {}};
    const double width = (hi - lo) / static_cast<double>(n_bins);
    rule.edges.push_back(lo);
    for (std::size_t i = 1; i < n_bins; ++i) rule.edges.push_back(lo + width * static_cast<double>(i));
    rule.edges.push_back(hi);
    return rule;
}

const std::string& apply_discretization(double value, const DiscretizationRule& rule) {
    return rule.apply(value);
}

// ---- compass and months ----------------------------------------------------

std::string_view to_string(Compass sector) {
    static constexpr std::array<std::string_view, 8> names = {
        "North", "North-East", "East", "South-East", "South", "South-West", "West", "North-West"};
    return names[static_cast<std::size_t>(sector)];
}

double sector_center(Compass sector) { return 45.0 * static_cast<double>(sector); }

Compass bin_direction(double degrees) {
    if (!std::isfinite(degrees)) throw InputError("direction must be finite");
    double shifted = std::fmod(degrees + 22.5, 360.0);
    if (shifted < 0.0) shifted += 360.0;
    const auto sector = static_cast<int>(std::floor(shifted / 45.0)) % 8;
    return static_cast<Compass>(sector);
}

std::string_view month_name(int month) {
    static constexpr std::array<std::string_view, 12> names = {
        "January", "February", "March",     "April",   "May",      "June",
        "July",    "August",   "September", "October", "November", "December"};
    if (month < 1 || month > 12) throw InputError("month outside 1..12");
    return names[static_cast<std::size_t>(month - 1)];
}

std::array<double, 12> expand_month(int month) {
    if (month < 1 || month > 12) throw InputError("month outside 1..12: " + std::to_string(month));
    std::array<double, 12> out{};
    out[static_cast<std::size_t>(month - 1)] = 1.0;
    return out;
}

namespace {

int date_field(std::string_view date, std::size_t offset, std::size_t len) {
    if (date.size() < 10 || date[4] != '-' || date[7] != '-')
        throw InputError("date '" + std::string(date) + "' is not YYYY-MM-DD");
    int v = 0;
    auto [ptr, ec] = std::from_chars(date.data() + offset, date.data() + offset + len, v);
    if (ec != std::errc() || ptr != date.data() + offset + len)
        throw InputError("date '" + std::string(date) + "' is not YYYY-MM-DD");
    return v;
}

}  // namespace

int month_of(std::string_view iso_date) {
    const int m = date_field(iso_date, 5, 2);
    if (m < 1 || m > 12) throw InputError("month outside 1..12 in '" + std::string(iso_date) + "'");
    return m;
}

int year_of(std::string_view iso_date) { return date_field(iso_date, 0, 4); }

// ---- split and summary -----------------------------------------------------

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ParameterError("train fraction must lie in (0,1)");
    if (data.empty()) throw InputError("cannot split an empty dataset");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(data.size())));
    const std::span<const std::size_t> all(order);
    return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

double sample_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = sample_mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

GroupSummary summarize_rows(const Dataset& data, const std::vector<std::size_t>& rows, std::string name) {
    GroupSummary g;
    g.beach = std::move(name);
    for (auto r : rows) (data.labels()[r] == 1 ? g.presence : g.absence)++;
    for (std::size_t j = 0; j < data.schema().size(); ++j) {
        const auto& f = data.schema()[j];
        if (f.kind != FeatureKind::continuous && f.kind != FeatureKind::circular_degrees) continue;
        std::vector<double> values;
        values.reserve(rows.size());
        for (auto r : rows) values.push_back(data.cell(r, j));
        g.stats.push_back({f.name, sample_mean(values), sample_sd(values)});
    }
    return g;
}

}  // namespace

Summary summarize(const Dataset& data) {
    Summary out;
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    out.overall = summarize_rows(data, all, "All");
    if (data.has_beaches()) {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < data.size(); ++i) groups[data.beaches()[i]].push_back(i);
        for (const auto& [beach, rows] : groups) out.beaches.push_back(summarize_rows(data, rows, beach));
    }
    return out;
}

std::string format_summary_table(const Summary& summary) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    const auto& cols = summary.overall.stats;
    os << std::left << std::setw(12) << "Beach" << std::right << std::setw(10) << "Presence"
       << std::setw(10) << "Absence";
    for (const auto& s : cols) os << "  " << std::setw(22) << (s.feature + " (mean, SD)");
    os << '\n';
    auto line = [&](const GroupSummary& g) {
        os << std::left << std::setw(12) << g.beach << std::right << std::setw(10) << g.presence
           << std::setw(10) << g.absence;
        for (const auto& s : g.stats) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(3) << s.mean << " (" << s.sd << ")";
            os << "  " << std::setw(22) << cell.str();
        }
        os << '\n';
    };
    for (const auto& g : summary.beaches) line(g);
    line(summary.overall);
    return os.str();
}

}  // namespace stinger
