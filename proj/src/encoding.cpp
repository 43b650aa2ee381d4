#include "stinger/encoding.hpp"

#include <cmath>
#include <numbers>

#include "stinger/error.hpp"

namespace stinger {

std::string_view to_string(Encoding e) { return e == Encoding::raw ? "raw" : "subgroups"; }

Encoding parse_encoding(std::string_view text) {
    if (text == "raw") return Encoding::raw;
    if (text == "subgroups") return Encoding::subgroups;
    throw ParameterError("unknown encoding '" + std::string(text) + "'");
}

namespace {

std::vector<double> column_values(const Dataset& data, std::size_t j) {
    std::vector<double> v(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) v[i] = data.cell(i, j);
    return v;
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

std::vector<DiscretizationRule> fit_level_rules(const Dataset& data) {
    std::vector<DiscretizationRule> rules;
    for (std::size_t j = 0; j < data.schema().size(); ++j) {
        const auto& f = data.schema()[j];
        if (f.kind != FeatureKind::continuous) continue;
        const auto values = column_values(data, j);
        rules.push_back(fit_discretization(values, 4, default_level_labels(), f.name));
    }
    return rules;
}

Encoder Encoder::fit(const Dataset& train, Encoding mode, const std::vector<DiscretizationRule>& level_rules) {
    Encoder enc;
    enc.schema_ = train.schema();
    enc.mode_ = mode;
    const auto p = enc.schema_.size();
    enc.mean_.assign(p, 0.0);
    enc.scale_.assign(p, 1.0);
    enc.rules_.assign(p, DiscretizationRule{});
    for (std::size_t j = 0; j < p; ++j) {
        const auto& f = enc.schema_[j];
        if (f.kind != FeatureKind::continuous) continue;
        const auto values = column_values(train, j);
        if (mode == Encoding::raw) {
            enc.mean_[j] = sample_mean(values);
            const double sd = sample_sd(values);
            enc.scale_[j] = sd > 0.0 ? sd : 1.0;
        } else {
            bool found = false;
            for (const auto& r : level_rules) {
                if (r.source == f.name) {
                    enc.rules_[j] = r;
                    found = true;
                }
            }
            if (!found) enc.rules_[j] = fit_discretization(values, 4, default_level_labels(), f.name);
        }
    }
    enc.build_columns();
    return enc;
}

void Encoder::build_columns() {
    columns_.clear();
    for (std::size_t j = 0; j < schema_.size(); ++j) {
        const auto& f = schema_[j];
        switch (f.kind) {
            case FeatureKind::continuous:
                if (mode_ == Encoding::raw) {
                    columns_.push_back({f.name, j});
                } else {
                    for (const auto& label : rules_[j].labels) columns_.push_back({f.name + "=" + label, j});
                }
                break;
            case FeatureKind::circular_degrees:
                if (mode_ == Encoding::raw) {
                    columns_.push_back({f.name + "_sin", j});
                    columns_.push_back({f.name + "_cos", j});
                } else {
                    for (int s = 0; s < 8; ++s)
                        columns_.push_back({f.name + "=" + std::string(to_string(static_cast<Compass>(s))), j});
                }
                break;
            case FeatureKind::categorical:
                for (const auto& c : f.categories) columns_.push_back({f.name + "=" + c, j});
                break;
            case FeatureKind::month:
                for (int m = 1; m <= 12; ++m) columns_.push_back({std::string(month_name(m)), j});
                break;
        }
    }
}

Matrix Encoder::transform(const Dataset& data) const {
    if (!(data.schema() == schema_)) throw ContractError("dataset schema does not match the fit-time encoding");
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(width()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        Eigen::Index c = 0;
        for (std::size_t j = 0; j < schema_.size(); ++j) {
            const auto& f = schema_[j];
            const double v = data.cell(i, j);
            switch (f.kind) {
                case FeatureKind::continuous:
                    if (mode_ == Encoding::raw) {
                        out(r, c++) = (v - mean_[j]) / scale_[j];
                    } else {
                        out(r, c + static_cast<Eigen::Index>(rules_[j].bin_index(v))) = 1.0;
                        c += static_cast<Eigen::Index>(rules_[j].labels.size());
                    }
                    break;
                case FeatureKind::circular_degrees:
                    if (mode_ == Encoding::raw) {
                        out(r, c++) = std::sin(v * kDegToRad);
                        out(r, c++) = std::cos(v * kDegToRad);
                    } else {
                        out(r, c + static_cast<int>(bin_direction(v))) = 1.0;
                        c += 8;
                    }
                    break;
                case FeatureKind::categorical: {
                    const auto k = static_cast<Eigen::Index>(v);
                    if (k < 0 || k >= static_cast<Eigen::Index>(f.categories.size()))
                        throw ContractError("category index out of range in '" + f.name + "'");
                    out(r, c + k) = 1.0;
                    c += static_cast<Eigen::Index>(f.categories.size());
                    break;
                }
                case FeatureKind::month: {
                    const auto ind = expand_month(static_cast<int>(v));
                    for (double x : ind) out(r, c++) = x;
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<double> Encoder::aggregate(const std::vector<double>& per_column) const {
    if (per_column.size() != columns_.size()) throw ContractError("score vector width mismatch");
    std::vector<double> out(schema_.size(), 0.0);
    for (std::size_t c = 0; c < columns_.size(); ++c) out[columns_[c].source] += per_column[c];
    return out;
}

nlohmann::json Encoder::to_json() const {
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t j = 0; j < schema_.size(); ++j) {
        const auto& f = schema_[j];
        nlohmann::json jf = {{"name", f.name}, {"kind", to_string(f.kind)}, {"units", f.units}};
        if (!f.categories.empty()) jf["categories"] = f.categories;
        if (f.kind == FeatureKind::continuous) {
            jf["mean"] = mean_[j];
            jf["scale"] = scale_[j];
            if (mode_ == Encoding::subgroups) {
                jf["edges"] = rules_[j].edges;
                jf["labels"] = rules_[j].labels;
            }
        }
        features.push_back(std::move(jf));
    }
    return {{"mode", to_string(mode_)}, {"features", std::move(features)}};
}

Encoder Encoder::from_json(const nlohmann::json& j) {
    Encoder enc;
    enc.mode_ = parse_encoding(j.at("mode").get<std::string>());
    std::vector<FeatureSpec> specs;
    for (const auto& jf : j.at("features")) {
        FeatureSpec f;
        f.name = jf.at("name").get<std::string>();
        f.kind = parse_feature_kind(jf.at("kind").get<std::string>());
        f.units = jf.value("units", std::string{});
        if (jf.contains("categories")) f.categories = jf["categories"].get<std::vector<std::string>>();
        enc.mean_.push_back(jf.value("mean", 0.0));
        enc.scale_.push_back(jf.value("scale", 1.0));
        DiscretizationRule rule;
        if (jf.contains("edges")) {
            rule.source = f.name;
            rule.edges = jf["edges"].get<std::vector<double>>();
            rule.labels = jf["labels"].get<std::vector<std::string>>();
        }
        enc.rules_.push_back(std::move(rule));
        specs.push_back(std::move(f));
    }
    enc.schema_ = FeatureSchema(std::move(specs));
    enc.build_columns();
    return enc;
}

}  // namespace stinger
