#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "stinger/schema.hpp"

namespace stinger {

enum class Encoding {
    raw,        // standardized continuous, (sin, cos) per circular, one-hot discrete
    subgroups,  // level bins for continuous, compass sectors for circular, one-hot discrete
};

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view text);

struct EncodedColumn {
    std::string name;
    std::size_t source = 0;  // index of the originating schema feature
};

/// Maps dataset rows to the numeric model input. Fitted on a training split;
/// the same instance must encode every later batch.
class Encoder {
public:
    Encoder() = default;

    /// `level_rules` supplies the continuous-feature bins for the subgroup
    /// encoding, keyed by feature name. Missing rules are fitted on `train`.
    static Encoder fit(const Dataset& train, Encoding mode = Encoding::raw,
                       const std::vector<DiscretizationRule>& level_rules = {});

    Matrix transform(const Dataset& data) const;

    const FeatureSchema& schema() const { return schema_; }
    Encoding mode() const { return mode_; }
    const std::vector<EncodedColumn>& columns() const { return columns_; }
    std::size_t width() const { return columns_.size(); }

    /// Sums per-column scores back onto their source features.
    std::vector<double> aggregate(const std::vector<double>& per_column) const;

    nlohmann::json to_json() const;
    static Encoder from_json(const nlohmann::json& j);

private:
    void build_columns();

    FeatureSchema schema_;
    Encoding mode_ = Encoding::raw;
    std::vector<double> mean_;  // per schema feature; continuous only
    std::vector<double> scale_;
    std::vector<DiscretizationRule> rules_;  // per schema feature; subgroup mode
    std::vector<EncodedColumn> columns_;
};

/// Level rules fitted on the whole dataset, one per continuous feature.
std::vector<DiscretizationRule> fit_level_rules(const Dataset& data);

}  // namespace stinger
