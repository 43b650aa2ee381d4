#include "stinger/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "stinger/circular.hpp"
#include "stinger/error.hpp"

namespace stinger {

void FixtureSpec::validate() const {
    if (n < 2) throw ParameterError("fixture needs at least 2 rows");
    if (!(prevalence > 0.0 && prevalence < 1.0)) throw ParameterError("prevalence must lie in (0, 1)");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw ParameterError("overlap must lie in [0, 1]");
}

namespace {

struct Continuous {
    double mean, sd, floor;
};

// sst_c, wind_speed_ms, curr_speed_ms
constexpr std::array<Continuous, 3> kContinuous = {{{21.0, 2.1, 10.0}, {5.4, 2.8, 0.1}, {0.215, 0.154, 0.005}}};
constexpr double kKappa = 4.0;

constexpr std::array<double, 12> kAbsenceMonths = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
constexpr std::array<double, 12> kPresenceMonths = {5, 6, 3, 1.5, 0.6, 0.3, 0.3, 0.3, 0.6, 1.2, 2.5, 4};

constexpr std::array<const char*, 3> kBeaches = {"Clovelly", "Coogee", "Maroubra"};
constexpr std::array<double, 3> kBeachWeights = {842, 1526, 1483};

struct ClassPattern {
    double wind_dir;
    double curr_dir;
    const std::array<double, 12>* months;
};

constexpr ClassPattern kAbsence = {270.0, 0.0, &kAbsenceMonths};
constexpr ClassPattern kPresence = {0.0, 180.0, &kPresenceMonths};

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> d = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && year % 4 == 0) return 29;
    return d[static_cast<std::size_t>(month - 1)];
}

}  // namespace

Dataset generate_fixture(const FixtureSpec& spec) {
    spec.validate();
    const FeatureSchema schema = FeatureSchema::study();
    const auto n = spec.n;
    const auto n_pos = static_cast<std::size_t>(std::llround(spec.prevalence * static_cast<double>(n)));

    std::mt19937_64 rng(spec.seed);
    std::vector<int> labels(n, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    std::shuffle(labels.begin(), labels.end(), rng);

    const auto i_sst = *schema.index_of("sst_c");
    const auto i_wd = *schema.index_of("wind_dir_deg");
    const auto i_ws = *schema.index_of("wind_speed_ms");
    const auto i_cd = *schema.index_of("curr_dir_deg");
    const auto i_cs = *schema.index_of("curr_speed_ms");
    const auto i_m = *schema.index_of("month");
    const std::array<std::size_t, 3> cont_idx = {i_sst, i_ws, i_cs};

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::discrete_distribution<int> beach_pick(kBeachWeights.begin(), kBeachWeights.end());
    std::uniform_int_distribution<int> year_pick(2016, 2020);

    Matrix cells(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(schema.size()));
    std::vector<std::string> beaches(n), dates(n);
    const double shift = (1.0 - spec.overlap) * 2.0;

    for (std::size_t r = 0; r < n; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const bool positive = labels[r] == 1;
        for (std::size_t k = 0; k < kContinuous.size(); ++k) {
            const auto& c = kContinuous[k];
            const double mean = c.mean + (positive ? shift * c.sd : 0.0);
            cells(row, static_cast<Eigen::Index>(cont_idx[k])) = std::max(c.floor, mean + c.sd * gauss(rng));
        }
        // with probability `overlap` the row follows a pattern shared by both classes
        const ClassPattern& own = positive ? kPresence : kAbsence;
        const ClassPattern& pattern = unit(rng) < spec.overlap ? (unit(rng) < 0.5 ? kAbsence : kPresence) : own;
        cells(row, static_cast<Eigen::Index>(i_wd)) = circular::draw_von_mises(pattern.wind_dir, kKappa, rng);
        const ClassPattern& pattern2 = unit(rng) < spec.overlap ? (unit(rng) < 0.5 ? kAbsence : kPresence) : own;
        cells(row, static_cast<Eigen::Index>(i_cd)) = circular::draw_von_mises(pattern2.curr_dir, kKappa, rng);
        const ClassPattern& pattern3 = unit(rng) < spec.overlap ? (unit(rng) < 0.5 ? kAbsence : kPresence) : own;
        std::discrete_distribution<int> month_pick(pattern3.months->begin(), pattern3.months->end());
        const int month = month_pick(rng) + 1;
        cells(row, static_cast<Eigen::Index>(i_m)) = month;

        beaches[r] = kBeaches[static_cast<std::size_t>(beach_pick(rng))];
        const int year = year_pick(rng);
        std::uniform_int_distribution<int> day_pick(1, days_in_month(year, month));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day_pick(rng));
        dates[r] = buf;
    }
    return Dataset(schema, std::move(cells), std::move(labels), std::move(beaches), std::move(dates));
}

}  // namespace stinger
