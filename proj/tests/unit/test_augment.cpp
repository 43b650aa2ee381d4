#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "stinger/augment.hpp"
#include "stinger/circular.hpp"
#include "stinger/error.hpp"
#include "stinger/fixture.hpp"
#include "util.hpp"

using namespace stinger;

namespace {

constexpr double kPi = 3.14159265358979323846;

// I_nu(x) by its power series
double bessel_series(double nu, double x) {
    double term = std::pow(x / 2.0, nu) / std::tgamma(nu + 1.0), sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= (x / 2.0) * (x / 2.0) / (k * (k + nu));
        sum += term;
    }
    return sum;
}

double arc_mean(double a, double b) {
    const std::complex<double> z = std::polar(1.0, a * kPi / 180.0) + std::polar(1.0, b * kPi / 180.0);
    return circular::wrap_degrees(std::arg(z) * 180.0 / kPi);
}

Dataset mixed(std::size_t n_neg, std::size_t n_pos, Seed seed) {
    FeatureSchema schema({{"t", FeatureKind::continuous, "", {}},
                          {"dir", FeatureKind::circular_degrees, "", {}},
                          {"kind", FeatureKind::categorical, "", {"a", "b", "c"}},
                          {"month", FeatureKind::month, "", {}}});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 360.0);
    std::uniform_int_distribution<int> cat(0, 2), mon(1, 12);
    const auto n = n_neg + n_pos;
    Matrix cells(static_cast<Eigen::Index>(n), 4);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        labels[i] = i < n_pos ? 1 : 0;
        cells(r, 0) = g(rng) * 3.0 + (labels[i] ? 4.0 : 0.0);
        cells(r, 1) = labels[i] ? circular::wrap_degrees(g(rng) * 30.0) : u(rng);
        cells(r, 2) = cat(rng);
        cells(r, 3) = mon(rng);
    }
    return Dataset(schema, cells, labels);
}

bool on_short_arc(double a, double b, double x) {
    const double span = std::abs(circular::signed_difference(a, b));
    const double da = std::abs(circular::signed_difference(a, x));
    const double db = std::abs(circular::signed_difference(x, b));
    return std::abs(da + db - span) < 1e-7;
}

}  // namespace

TEST_CASE("shorter-arc interpolation matches complex averaging") {
    CHECK(circular::interpolate(350, 10, 0.5) == doctest::Approx(0.0).epsilon(1e-9));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 360.0);
    for (int i = 0; i < 500; ++i) {
        const double a = u(rng), b = u(rng);
        if (std::abs(std::abs(circular::signed_difference(a, b)) - 180.0) < 1e-6) continue;
        const double mid = circular::interpolate(a, b, 0.5);
        CHECK(std::abs(circular::signed_difference(mid, arc_mean(a, b))) < 1e-7);
        CHECK(on_short_arc(a, b, circular::interpolate(a, b, 0.3)));
    }
}

TEST_CASE("SMOTE reaches parity and keeps originals verbatim") {
    const Dataset train = mixed(940, 60, 2);
    const SmoteResult res = smote_nc_detailed(train, {5, 11});
    CHECK(res.data.count(1) == res.data.count(0));
    CHECK(res.data.count(0) == 940);
    CHECK(res.data.cells().topRows(1000) == train.cells());
    CHECK(res.parents.size() == 880);
    for (std::size_t i = 0; i < res.parents.size(); ++i) {
        const auto row = 1000 + i;
        const auto [a, b] = res.parents[i];
        CHECK(train.labels()[a] == 1);
        CHECK(train.labels()[b] == 1);
        CHECK(a != b);
        const double lam = res.gaps[i];
        const double t = res.data.cell(row, 0);
        CHECK(t == doctest::Approx(train.cell(a, 0) + lam * (train.cell(b, 0) - train.cell(a, 0))));
        CHECK(t >= std::min(train.cell(a, 0), train.cell(b, 0)) - 1e-12);
        CHECK(t <= std::max(train.cell(a, 0), train.cell(b, 0)) + 1e-12);
        CHECK(on_short_arc(train.cell(a, 1), train.cell(b, 1), res.data.cell(row, 1)));
        CHECK(res.data.origins()[row] == Origin::synthetic);
    }
}

TEST_CASE("SMOTE discrete cells take the neighbourhood mode") {
    Dataset train = mixed(200, 20, 3);
    Matrix cells = train.cells();
    for (Eigen::Index r = 0; r < 20; ++r) cells(r, 2) = 1;
    train = Dataset(train.schema(), cells, train.labels());
    const Dataset out = smote_nc(train, {5, 1});
    for (std::size_t r = 220; r < out.size(); ++r) CHECK(out.cell(r, 2) == 1);
}

TEST_CASE("SMOTE midpoint on a single continuous feature") {
    FeatureSchema schema({{"v", FeatureKind::continuous, "", {}}});
    Matrix cells(5, 1);
    cells << 0.2, 0.6, 5.0, 6.0, 7.0;
    const Dataset d(schema, cells, {1, 1, 0, 0, 0});
    const auto res = smote_nc_detailed(d, {1, 4});
    REQUIRE(res.parents.size() == 1);
    const double lam = res.gaps[0];
    const auto [a, b] = res.parents[0];
    CHECK(res.data.cell(5, 0) == doctest::Approx(cells(static_cast<Eigen::Index>(a), 0) * (1 - lam) +
                                                 cells(static_cast<Eigen::Index>(b), 0) * lam));
}

TEST_CASE("SMOTE input errors") {
    const Dataset one_class = testutil::numeric(10, 0);
    CHECK_THROWS_AS(smote_nc(one_class, {5, 0}), StrategyError);
    CHECK_THROWS_AS(smote_nc(testutil::numeric(100, 5), {5, 0}), ParameterError);
}

TEST_CASE("SMOTE is deterministic per seed") {
    const Dataset train = mixed(300, 30, 4);
    CHECK(smote_nc(train, {5, 9}).cells() == smote_nc(train, {5, 9}).cells());
    CHECK_FALSE(smote_nc(train, {5, 9}).cells() == smote_nc(train, {5, 10}).cells());
}

TEST_CASE("undersampling balances without duplicates") {
    const Dataset train = testutil::numeric(1500, 100);
    for (Seed s = 0; s < 20; ++s) {
        const auto res = random_undersample_detailed(train, s);
        CHECK(res.data.count(1) == 100);
        CHECK(res.data.count(0) == 100);
        std::set<std::size_t> seen(res.source_rows.begin(), res.source_rows.end());
        CHECK(seen.size() == res.source_rows.size());
        for (std::size_t r = 0; r < 100; ++r) CHECK(seen.count(r) == 1);
    }
    CHECK(random_undersample(train, 3).cells() == random_undersample(train, 3).cells());
    CHECK_THROWS_AS(random_undersample(testutil::numeric(10, 10), 0), StrategyError);
}

TEST_CASE("Bessel ratio agrees with the power series") {
    for (double k : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 80.0}) {
        CHECK(circular::bessel_ratio(k) == doctest::Approx(bessel_series(1, k) / bessel_series(0, k)).epsilon(1e-10));
        CHECK(circular::inverse_bessel_ratio(circular::bessel_ratio(k)) == doctest::Approx(k).epsilon(1e-6));
    }
    CHECK(circular::bessel_ratio(2.0) == doctest::Approx(0.6978).epsilon(1e-4));
    CHECK(circular::bessel_ratio(600.0) == doctest::Approx(circular::bessel_ratio(499.999)).epsilon(1e-3));
}

TEST_CASE("von Mises sampling limits") {
    const auto uniform = circular::sample_von_mises(0, 0, 10000, 1);
    CHECK(circular::mean_resultant_length(uniform) < 0.03);
    const auto k2 = circular::sample_von_mises(40, 2, 10000, 2);
    CHECK(std::abs(circular::mean_resultant_length(k2) - bessel_series(1, 2) / bessel_series(0, 2)) < 0.02);
    const auto tight = circular::sample_von_mises(200, 1e4, 2000, 3);
    for (double a : tight) {
        CHECK(a >= 0.0);
        CHECK(a < 360.0);
        CHECK(std::abs(circular::signed_difference(200, a)) < 3.0);
    }
    CHECK(circular::sample_von_mises(10, 3, 50, 7) == circular::sample_von_mises(10, 3, 50, 7));
}

TEST_CASE("mixture fit on identical angles caps the concentration") {
    std::vector<double> a(50, 90.0);
    const auto mix = circular::fit_von_mises_mixture(a, 1, 0);
    REQUIRE(mix.components.size() == 1);
    CHECK(mix.components[0].mu == doctest::Approx(90.0));
    CHECK(mix.components[0].kappa == doctest::Approx(circular::kKappaMax));
}

TEST_CASE("mixture fit on uniform angles finds no concentration") {
    const auto a = circular::sample_von_mises(0, 0, 10000, 4);
    const auto mix = circular::fit_von_mises_mixture(a, 1, 0);
    CHECK(mix.components[0].kappa < 0.1);
}

TEST_CASE("mixture fit separates two clusters with monotone likelihood") {
    auto a = circular::sample_von_mises(0, 50, 500, 5);
    const auto b = circular::sample_von_mises(180, 50, 500, 6);
    a.insert(a.end(), b.begin(), b.end());
    const auto mix = circular::fit_von_mises_mixture(a, 2, 1);
    REQUIRE(mix.components.size() == 2);
    auto comps = mix.components;
    std::sort(comps.begin(), comps.end(), [](auto& x, auto& y) {
        return std::abs(circular::signed_difference(0, x.mu)) < std::abs(circular::signed_difference(0, y.mu));
    });
    CHECK(std::abs(circular::signed_difference(0, comps[0].mu)) < 5.0);
    CHECK(std::abs(circular::signed_difference(180, comps[1].mu)) < 5.0);
    CHECK(comps[0].weight == doctest::Approx(0.5).epsilon(0.1));
    for (std::size_t i = 1; i < mix.loglik_trace.size(); ++i)
        CHECK(mix.loglik_trace[i] >= mix.loglik_trace[i - 1] - 1e-9);
    std::vector<double> few(9, 1.0);
    CHECK_THROWS_AS(circular::fit_von_mises_mixture(few, 1, 0), DataError);
}

TEST_CASE("copula model keeps marginal extremes and flags constants") {
    Dataset neg = generate_fixture({600, 0.05, 0.5, 3}).filter_label(0);
    const auto model = fit_copula_negative_model(neg);
    const auto sst = *neg.schema().index_of("sst_c");
    const auto col = testutil::column(neg, sst);
    const auto pos = std::find(model.continuous.begin(), model.continuous.end(), sst) - model.continuous.begin();
    CHECK(model.marginals[static_cast<std::size_t>(pos)].min() == *std::min_element(col.begin(), col.end()));
    CHECK(model.marginals[static_cast<std::size_t>(pos)].max() == *std::max_element(col.begin(), col.end()));
    CHECK(model.circular.size() == 2);
    CHECK(model.mixtures[0].components.size() == 2);
    for (const auto& f : model.frequencies) CHECK(std::accumulate(f.begin(), f.end(), 0.0) == doctest::Approx(1.0));
    const Matrix& c = model.correlation;
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index i = 0; i < c.rows(); ++i) CHECK(c(i, i) == doctest::Approx(1.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(c)};
    CHECK(es.eigenvalues().minCoeff() > -1e-10);

    Matrix cells = neg.cells();
    cells.col(static_cast<Eigen::Index>(sst)).setConstant(20.0);
    const auto flat = fit_copula_negative_model(Dataset(neg.schema(), cells, neg.labels()));
    CHECK(flat.marginals[static_cast<std::size_t>(pos)].degenerate());
    const auto sample = sample_synthetic_negatives(flat, 50, 1);
    for (std::size_t r = 0; r < sample.size(); ++r) CHECK(sample.cell(r, sst) == 20.0);

    CHECK_THROWS_AS(fit_copula_negative_model(neg.subset(std::vector<std::size_t>{0, 1, 2})), DataError);
}

TEST_CASE("copula on independent columns has near-zero correlation") {
    FeatureSchema schema({{"a", FeatureKind::continuous, "", {}}, {"b", FeatureKind::continuous, "", {}},
                          {"c", FeatureKind::continuous, "", {}}});
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::exponential_distribution<double> e(1.0);
    Matrix cells(2000, 3);
    for (Eigen::Index r = 0; r < 2000; ++r) cells.row(r) << g(rng), e(rng), g(rng) * g(rng);
    const auto model = fit_copula_negative_model(Dataset(schema, cells, std::vector<int>(2000, 0)));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(model.correlation(i, j)) < 0.1);
}

TEST_CASE("copula samples match held-out negatives and are seeded") {
    const Dataset all = generate_fixture({4000, 0.05, 0.5, 12}).filter_label(0);
    std::vector<std::size_t> a, b;
    for (std::size_t r = 0; r < all.size(); ++r) (r % 2 ? b : a).push_back(r);
    const Dataset fit = all.subset(a), held = all.subset(b);
    const auto model = fit_copula_negative_model(fit);
    const Dataset gen = sample_synthetic_negatives(model, 500, 3);
    CHECK(gen.size() == 500);
    CHECK(gen.count(0) == 500);
    for (std::size_t f = 0; f < gen.schema().size(); ++f)
        CHECK(testutil::ks_statistic(testutil::column(gen, f), testutil::column(held, f)) <= 0.15);
    CHECK(sample_synthetic_negatives(model, 40, 9).cells() == sample_synthetic_negatives(model, 40, 9).cells());
}

TEST_CASE("normal scores and quantiles") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    CHECK(normal_cdf(normal_quantile(0.2)) == doctest::Approx(0.2));
    std::vector<double> v = {3, 1, 2, 2};
    const auto s = normal_scores(v);
    CHECK(s[1] < s[2]);
    CHECK(s[2] == s[3]);
    CHECK(s[0] > s[2]);
}

TEST_CASE("synthetic negative dataset pairs every positive with a generated row") {
    const Dataset data = generate_fixture({2000, 0.1225, 0.5, 5});
    const Dataset pos = data.filter_label(1);
    REQUIRE(pos.size() == 245);
    const auto model = fit_copula_negative_model(data.filter_label(0));
    const Dataset out = build_synthetic_negative_dataset(pos, model, 7);
    CHECK(out.size() == 490);
    CHECK(out.count(0) == out.count(1));
    for (std::size_t r = 0; r < out.size(); ++r) {
        if (out.labels()[r] == 0) CHECK(out.origins()[r] == Origin::synthetic);
        else CHECK(out.origins()[r] == Origin::real);
    }
    CHECK(build_synthetic_negative_dataset(pos, model, 7).cells() == out.cells());
}

TEST_CASE("resampling plans parse and validate") {
    CHECK(ResamplePlan::parse("synthneg-gan").backend == NegativeBackend::gan);
    CHECK(ResamplePlan::parse("smote").name() == "smote");
    CHECK_THROWS_AS(ResamplePlan::parse("oversample"), ParameterError);
    ResamplePlan bad;
    bad.strategy = Strategy::none;
    bad.backend = NegativeBackend::copula;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    const Dataset train = generate_fixture({800, 0.1, 0.5, 2});
    ResamplePlan p = ResamplePlan::parse("synthneg-copula");
    p.seed = 3;
    const Dataset out = apply_plan(train, p);
    CHECK(out.count(1) == train.count(1));
    CHECK(out.count(0) == train.count(1));
}

TEST_CASE("GAN reproduces a Gaussian column and decodes one category per row") {
    FeatureSchema schema({{"v", FeatureKind::continuous, "", {}}, {"k", FeatureKind::categorical, "", {"x", "y"}}});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(10.0, 2.0);
    std::bernoulli_distribution coin(0.3);
    Matrix cells(1000, 2);
    for (Eigen::Index r = 0; r < 1000; ++r) cells.row(r) << g(rng), coin(rng) ? 1.0 : 0.0;
    const Dataset neg(schema, cells, std::vector<int>(1000, 0));
    double mean = 0.0, sd = 0.0;
    TabularGan gan;
    for (Seed seed : {4, 5, 6}) {
        GanParams p;
        p.epochs = 100;
        p.seed = seed;
        gan = train_tabular_gan(neg, p);
        const Dataset out = gan.sample(1000, 5);
        const auto v = testutil::column(out, 0);
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        mean += m / 3.0;
        sd += std::sqrt(ss / (v.size() - 1)) / 3.0;
        for (std::size_t r = 0; r < out.size(); ++r) CHECK((out.cell(r, 1) == 0.0 || out.cell(r, 1) == 1.0));
    }
    CAPTURE(mean);
    CAPTURE(sd);
    CHECK(std::abs(mean - 10.0) < 0.2 * 2.0);
    CHECK(std::abs(sd - 2.0) < 0.4);
    CHECK(gan.sample(20, 5).cells() == gan.sample(20, 5).cells());
}

TEST_CASE("GAN training is seed-deterministic") {
    const Dataset neg = generate_fixture({300, 0.1, 0.5, 1}).filter_label(0);
    GanParams p;
    p.epochs = 3;
    p.seed = 2;
    const auto a = train_tabular_gan(neg, p), b = train_tabular_gan(neg, p);
    CHECK(a.generator.parameters() == b.generator.parameters());
    CHECK(a.sample(30, 1).cells() == b.sample(30, 1).cells());
}
