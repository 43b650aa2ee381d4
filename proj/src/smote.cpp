#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "stinger/augment.hpp"
#include "stinger/error.hpp"

namespace stinger {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Minority rows embedded for the neighbour search: continuous cells
// standardized, circular cells as (sin, cos). Discrete cells stay as codes
// and are compared for equality.
struct Embedding {
    Matrix numeric;
    Matrix discrete;
    double penalty = 0.0;  // added to the squared distance per mismatch
};

Embedding embed(const Dataset& data, const std::vector<std::size_t>& rows) {
    const auto& schema = data.schema();
    std::vector<std::size_t> num_cols, disc_cols;
    std::size_t width = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        switch (schema[j].kind) {
            case FeatureKind::continuous: width += 1; break;
            case FeatureKind::circular_degrees: width += 2; break;
            default: disc_cols.push_back(j); break;
        }
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    Embedding e;
    e.numeric.resize(m, static_cast<Eigen::Index>(width));
    e.discrete.resize(m, static_cast<Eigen::Index>(disc_cols.size()));
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        const auto kind = schema[j].kind;
        if (kind == FeatureKind::continuous) {
            std::vector<double> v(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) v[i] = data.cell(rows[i], j);
            const double mean = sample_mean(v);
            const double sd = sample_sd(v);
            for (std::size_t i = 0; i < rows.size(); ++i)
                e.numeric(static_cast<Eigen::Index>(i), c) = sd > 0.0 ? (v[i] - mean) / sd : 0.0;
            ++c;
        } else if (kind == FeatureKind::circular_degrees) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double a = data.cell(rows[i], j) * kDeg;
                e.numeric(static_cast<Eigen::Index>(i), c) = std::sin(a);
                e.numeric(static_cast<Eigen::Index>(i), c + 1) = std::cos(a);
            }
            c += 2;
        }
    }
    for (std::size_t d = 0; d < disc_cols.size(); ++d)
        for (std::size_t i = 0; i < rows.size(); ++i)
            e.discrete(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = data.cell(rows[i], disc_cols[d]);

    if (width > 0 && !disc_cols.empty()) {
        std::vector<double> sds;
        for (Eigen::Index col = 0; col < e.numeric.cols(); ++col) {
            std::vector<double> v(rows.size());
            for (Eigen::Index i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = e.numeric(i, col);
            sds.push_back(sample_sd(v));
        }
        std::sort(sds.begin(), sds.end());
        const auto h = sds.size();
        const double median = h % 2 ? sds[h / 2] : 0.5 * (sds[h / 2 - 1] + sds[h / 2]);
        e.penalty = median * median;
    }
    return e;
}

std::vector<std::vector<std::size_t>> nearest_neighbours(const Embedding& e, std::size_t k) {
    const auto m = static_cast<std::size_t>(e.numeric.rows());
    std::vector<std::vector<std::size_t>> out(m);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < m; ++i) {
        dist.clear();
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const auto jj = static_cast<Eigen::Index>(j);
            double d = (e.numeric.row(ii) - e.numeric.row(jj)).squaredNorm();
            for (Eigen::Index c = 0; c < e.discrete.cols(); ++c)
                if (e.discrete(ii, c) != e.discrete(jj, c)) d += e.penalty;
            dist.emplace_back(d, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
        for (std::size_t t = 0; t < k; ++t) out[i].push_back(dist[t].second);
    }
    return out;
}

}  // namespace

SmoteResult smote_nc_detailed(const Dataset& train, const SmoteParams& params) {
    const auto n1 = train.count(1), n0 = train.count(0);
    if (n1 == 0 || n0 == 0) throw StrategyError("SMOTE-NC needs both classes in the training data");
    if (params.k_neighbors < 1) throw ParameterError("k_neighbors must be at least 1");
    const int minority = n1 < n0 ? 1 : 0;
    const auto n_min = std::min(n1, n0), n_maj = std::max(n1, n0);
    if (n_min <= params.k_neighbors)
        throw ParameterError("minority class has " + std::to_string(n_min) + " rows; needs more than k_neighbors = " +
                             std::to_string(params.k_neighbors));

    SmoteResult result;
    const auto needed = n_maj - n_min;
    if (needed == 0) {
        result.data = train;
        return result;
    }

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train.labels()[i] == minority) rows.push_back(i);
    const Embedding e = embed(train, rows);
    const auto neighbours = nearest_neighbours(e, params.k_neighbors);

    const auto& schema = train.schema();
    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<std::size_t> pick_row(0, n_min - 1);
    std::uniform_int_distribution<std::size_t> pick_nn(0, params.k_neighbors - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Matrix cells(static_cast<Eigen::Index>(needed), static_cast<Eigen::Index>(schema.size()));
    for (std::size_t s = 0; s < needed; ++s) {
        const auto base = pick_row(rng);
        const auto nn = neighbours[base][pick_nn(rng)];
        const double gap = unit(rng);
        const auto a = rows[base], b = rows[nn];
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const double x = train.cell(a, j), y = train.cell(b, j);
            double v = x;
            switch (schema[j].kind) {
                case FeatureKind::continuous: v = x + gap * (y - x); break;
                case FeatureKind::circular_degrees: v = circular::interpolate(x, y, gap); break;
                case FeatureKind::categorical:
                case FeatureKind::month: {
                    std::vector<std::pair<double, int>> tally;
                    for (auto idx : neighbours[base]) {
                        const double code = train.cell(rows[idx], j);
                        auto it = std::find_if(tally.begin(), tally.end(), [&](auto& t) { return t.first == code; });
                        if (it == tally.end()) tally.emplace_back(code, 1);
                        else ++it->second;
                    }
                    // most frequent; ties go to the lowest code
                    std::sort(tally.begin(), tally.end(), [](const auto& p, const auto& q) {
                        return p.second != q.second ? p.second > q.second : p.first < q.first;
                    });
                    v = tally.front().first;
                    break;
                }
            }
            cells(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = v;
        }
        result.parents.emplace_back(a, b);
        result.gaps.push_back(gap);
    }
    Dataset synthetic(schema, std::move(cells), std::vector<int>(needed, minority), {}, {},
                      std::vector<Origin>(needed, Origin::synthetic));
    result.data = Dataset::concat(train, synthetic);
    return result;
}

Dataset smote_nc(const Dataset& train, const SmoteParams& params) {
    return smote_nc_detailed(train, params).data;
}

}  // namespace stinger
