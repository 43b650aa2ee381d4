#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "stinger/schema.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("stinger_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline const char* kHeader = "date,beach,presence,sst_c,wind_dir_deg,wind_speed_ms,curr_dir_deg,curr_speed_ms\n";

/// Two continuous features and a label; row i has x0 = i.
inline stinger::Dataset numeric(std::size_t n, std::size_t pos, stinger::Seed seed = 1) {
    using namespace stinger;
    FeatureSchema schema({{"x0", FeatureKind::continuous, "", {}}, {"x1", FeatureKind::continuous, "", {}}});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix cells(static_cast<Eigen::Index>(n), 2);
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i < pos ? 1 : 0;
        cells(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        cells(static_cast<Eigen::Index>(i), 1) = g(rng) + (labels[i] ? 2.0 : 0.0);
    }
    return Dataset(schema, cells, labels);
}

/// Largest gap between the empirical CDFs of two samples.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

inline std::vector<double> column(const stinger::Dataset& d, std::size_t f) {
    std::vector<double> v(d.size());
    for (std::size_t r = 0; r < d.size(); ++r) v[r] = d.cell(r, f);
    return v;
}

}  // namespace testutil
