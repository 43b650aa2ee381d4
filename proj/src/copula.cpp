#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>

#include "stinger/augment.hpp"
#include "stinger/error.hpp"

namespace stinger {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0,1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

std::vector<double> normal_scores(std::span<const double> values) {
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // mid-rank, 1-based
        const double z = normal_quantile(rank / static_cast<double>(n + 1));
        for (std::size_t t = i; t <= j; ++t) scores[order[t]] = z;
        i = j + 1;
    }
    return scores;
}

double EmpiricalMarginal::quantile(double u) const {
    if (sorted.empty()) throw ContractError("empty marginal");
    const double h = std::clamp(u, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CopulaNegativeModel fit_copula_negative_model(const Dataset& negatives) {
    constexpr std::size_t kMinRows = 30;
    if (negatives.size() < kMinRows)
        throw DataError("copula model needs at least " + std::to_string(kMinRows) + " negative rows, got " +
                        std::to_string(negatives.size()));
    CopulaNegativeModel model;
    model.schema = negatives.schema();
    const auto n = negatives.size();

    std::vector<std::vector<double>> scores;
    for (std::size_t j = 0; j < model.schema.size(); ++j) {
        const auto& f = model.schema[j];
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = negatives.cell(i, j);
        switch (f.kind) {
            case FeatureKind::continuous: {
                model.continuous.push_back(j);
                scores.push_back(normal_scores(column));
                std::sort(column.begin(), column.end());
                model.marginals.push_back({std::move(column)});
                break;
            }
            case FeatureKind::circular_degrees:
                model.circular.push_back(j);
                model.mixtures.push_back(circular::fit_von_mises_mixture(column, 2, /*seed=*/0));
                break;
            case FeatureKind::categorical:
            case FeatureKind::month: {
                model.discrete.push_back(j);
                std::vector<double> freq(f.cardinality(), 0.0);
                for (double v : column) {
                    const auto code = f.kind == FeatureKind::month ? static_cast<std::size_t>(v) - 1
                                                                   : static_cast<std::size_t>(v);
                    freq.at(code) += 1.0;
                }
                for (auto& x : freq) x /= static_cast<double>(n);
                model.frequencies.push_back(std::move(freq));
                break;
            }
        }
    }

    const auto p = static_cast<Eigen::Index>(model.continuous.size());
    model.correlation = Matrix::Identity(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a + 1; b < p; ++b) {
            const auto& x = scores[static_cast<std::size_t>(a)];
            const auto& y = scores[static_cast<std::size_t>(b)];
            const double mx = sample_mean(x), my = sample_mean(y);
            double sxy = 0.0, sxx = 0.0, syy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sxy += (x[i] - mx) * (y[i] - my);
                sxx += (x[i] - mx) * (x[i] - mx);
                syy += (y[i] - my) * (y[i] - my);
            }
            // a constant column has no spread; treat it as uncorrelated
            const double r = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
            model.correlation(a, b) = model.correlation(b, a) = r;
        }
    }
    return model;
}

namespace {

// Symmetric square root factor of a PSD matrix; negative eigenvalues from
// round-off are clipped to zero.
Matrix psd_factor(const Matrix& corr) {
    if (corr.rows() == 0) return corr;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal();
}

std::size_t draw_code(const std::vector<double>& freq, std::mt19937_64& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t c = 0; c < freq.size(); ++c) {
        if (u < freq[c]) return c;
        u -= freq[c];
    }
    // round-off: last category with positive mass
    for (std::size_t c = freq.size(); c-- > 0;)
        if (freq[c] > 0.0) return c;
    return 0;
}

}  // namespace

Dataset sample_synthetic_negatives(const CopulaNegativeModel& model, std::size_t n, Seed seed) {
    if (n < 1) throw ParameterError("sample size must be at least 1");
    const auto& schema = model.schema;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Matrix factor = psd_factor(model.correlation);
    const auto p = static_cast<Eigen::Index>(model.continuous.size());

    Matrix cells(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(schema.size()));
    Eigen::VectorXd eps(p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index a = 0; a < p; ++a) eps[a] = normal(rng);
        const Eigen::VectorXd z = factor * eps;
        for (Eigen::Index a = 0; a < p; ++a) {
            const auto& marginal = model.marginals[static_cast<std::size_t>(a)];
            cells(r, static_cast<Eigen::Index>(model.continuous[static_cast<std::size_t>(a)])) =
                marginal.quantile(normal_cdf(z[a]));
        }
        for (std::size_t c = 0; c < model.circular.size(); ++c)
            cells(r, static_cast<Eigen::Index>(model.circular[c])) = model.mixtures[c].sample(rng);
        for (std::size_t d = 0; d < model.discrete.size(); ++d) {
            const auto j = model.discrete[d];
            const auto code = draw_code(model.frequencies[d], rng);
            cells(r, static_cast<Eigen::Index>(j)) =
                schema[j].kind == FeatureKind::month ? static_cast<double>(code + 1) : static_cast<double>(code);
        }
    }
    return Dataset(schema, std::move(cells), std::vector<int>(n, 0), {}, {},
                   std::vector<Origin>(n, Origin::synthetic));
}

}  // namespace stinger
