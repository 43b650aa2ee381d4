#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stinger/types.hpp"

namespace stinger {

enum class FeatureKind { continuous, circular_degrees, categorical, month };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    std::string units;
    // Categorical only: cells hold an index into this list.
    std::vector<std::string> categories;

    bool operator==(const FeatureSpec&) const = default;

    /// Number of distinct values a discrete feature can take (12 for month).
    std::size_t cardinality() const;
    bool is_discrete() const {
        return kind == FeatureKind::categorical || kind == FeatureKind::month;
    }
};

class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FeatureSpec> features);

    /// Sea-surface temperature, wind and current speed/direction, month.
    static FeatureSchema study();

    std::size_t size() const { return features_.size(); }
    const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
    auto begin() const { return features_.begin(); }
    auto end() const { return features_.end(); }
    const std::vector<FeatureSpec>& features() const { return features_; }

    std::optional<std::size_t> index_of(std::string_view name) const;
    std::vector<std::size_t> indices_of(FeatureKind kind) const;

    bool operator==(const FeatureSchema&) const = default;

private:
    std::vector<FeatureSpec> features_;
};

enum class Origin : std::uint8_t { real, synthetic };

/// Immutable table of observations. Cells are numeric: continuous and
/// circular values as-is (degrees for circular), categorical cells as the
/// category index, month cells as 1..12.
class Dataset {
public:
    Dataset() = default;
    Dataset(FeatureSchema schema, Matrix cells, std::vector<int> labels,
            std::vector<std::string> beaches = {}, std::vector<std::string> dates = {},
            std::vector<Origin> origins = {});

    const FeatureSchema& schema() const { return schema_; }
    const Matrix& cells() const { return cells_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::string>& beaches() const { return beaches_; }
    const std::vector<std::string>& dates() const { return dates_; }
    const std::vector<Origin>& origins() const { return origins_; }

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    bool has_beaches() const { return !beaches_.empty(); }
    bool has_dates() const { return !dates_.empty(); }

    double cell(std::size_t row, std::size_t feature) const { return cells_(row, feature); }
    std::size_t count(int label) const;

    Dataset subset(std::span<const std::size_t> rows) const;
    /// Rows whose label equals `label`, in order.
    Dataset filter_label(int label) const;
    /// Same rows with every origin set to `origin`.
    Dataset with_origin(Origin origin) const;

    /// Row-wise concatenation; schemas must match. Beach/date columns are
    /// kept only when both sides carry them.
    static Dataset concat(const Dataset& a, const Dataset& b);

private:
    FeatureSchema schema_;
    Matrix cells_;
    std::vector<int> labels_;
    std::vector<std::string> beaches_;
    std::vector<std::string> dates_;
    std::vector<Origin> origins_;
};

struct LoadOptions {
    std::string label_column = "presence";
    bool drop_incomplete_rows = false;
    std::function<void(std::string_view)> warn;  // stderr when empty
};

/// Reads a comma-separated observation table. Feature columns are looked up
/// by schema name; a month feature without its own column is derived from
/// the `date` column. Location columns and any other extras are ignored.
Dataset load_observations(const std::filesystem::path& path, const FeatureSchema& schema,
                          const LoadOptions& options = {});
Dataset parse_observations(const std::string& text, const FeatureSchema& schema,
                           const LoadOptions& options = {});

/// Writes the dataset in the same layout load_observations reads. When
/// `with_origin` is set an `origin` column (real/synthetic) is appended.
void write_observations(const std::filesystem::path& path, const Dataset& data,
                        bool with_origin = false);

// ---- discretization -------------------------------------------------------

struct DiscretizationRule {
    std::string source;
    std::vector<std::string> labels;
    std::vector<double> edges;  // labels.size() + 1, ascending

    std::size_t bin_index(double value) const;
    const std::string& apply(double value) const { return labels[bin_index(value)]; }
};

const std::vector<std::string>& default_level_labels();

DiscretizationRule fit_discretization(std::span<const double> values, std::size_t n_bins = 4,
                                      std::vector<std::string> labels = default_level_labels(),
                                      std::string source = {});

/// Clamps out-of-range values into the outer bins.
const std::string& apply_discretization(double value, const DiscretizationRule& rule);

// ---- compass sectors and months -------------------------------------------

enum class Compass { north, north_east, east, south_east, south, south_west, west, north_west };

std::string_view to_string(Compass sector);
double sector_center(Compass sector);

/// 45 degree sectors centred on the eight named directions, half-open at the
/// clockwise edge.
Compass bin_direction(double degrees);

std::string_view month_name(int month);
std::array<double, 12> expand_month(int month);
/// Month (1..12) of an ISO-8601 `YYYY-MM-DD` date.
int month_of(std::string_view iso_date);
int year_of(std::string_view iso_date);

// ---- splitting and summaries ----------------------------------------------

struct SplitSpec {
    double train_fraction = 0.6;
    Seed seed = 0;
};

/// Shuffled, row-disjoint partition; the train part holds
/// round(train_fraction * n) rows.
std::pair<Dataset, Dataset> split_train_test(const Dataset& data, const SplitSpec& spec);

struct FeatureStats {
    std::string feature;
    double mean = 0.0;
    double sd = 0.0;
};

struct GroupSummary {
    std::string beach;
    std::size_t presence = 0;
    std::size_t absence = 0;
    std::vector<FeatureStats> stats;
};

struct Summary {
    std::vector<GroupSummary> beaches;  // sorted by name
    GroupSummary overall;
};

Summary summarize(const Dataset& data);
std::string format_summary_table(const Summary& summary);

double sample_mean(std::span<const double> values);
/// Divisor n-1; 0 for fewer than two values.
double sample_sd(std::span<const double> values);

}  // namespace stinger
