#include "stinger/circular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stinger/error.hpp"

namespace stinger::circular {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

double wrap_degrees(double degrees) {
    double r = std::fmod(degrees, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r -= 360.0;
    return r;
}

double signed_difference(double from, double to) {
    double d = wrap_degrees(to - from);
    if (d > 180.0) d -= 360.0;
    return d;
}

double interpolate(double a, double b, double t) {
    return wrap_degrees(a + t * signed_difference(a, b));
}

double mean_resultant_length(std::span<const double> degrees) {
    if (degrees.empty()) return 0.0;
    double c = 0.0, s = 0.0;
    for (double d : degrees) {
        c += std::cos(d * kDeg);
        s += std::sin(d * kDeg);
    }
    return std::hypot(c, s) / static_cast<double>(degrees.size());
}

double circular_mean(std::span<const double> degrees) {
    double c = 0.0, s = 0.0;
    for (double d : degrees) {
        c += std::cos(d * kDeg);
        s += std::sin(d * kDeg);
    }
    return wrap_degrees(std::atan2(s, c) / kDeg);
}

double bessel_ratio(double kappa) {
    if (kappa <= 0.0) return 0.0;
    if (kappa < 500.0) return std::cyl_bessel_i(1.0, kappa) / std::cyl_bessel_i(0.0, kappa);
    const double k2 = kappa * kappa;
    return 1.0 - 1.0 / (2.0 * kappa) - 1.0 / (8.0 * k2) - 1.0 / (8.0 * k2 * kappa);
}

double log_bessel_i0(double kappa) {
    if (kappa < 500.0) return std::log(std::cyl_bessel_i(0.0, kappa));
    const double k2 = kappa * kappa;
    return kappa - 0.5 * std::log(2.0 * kPi * kappa) +
           std::log1p(1.0 / (8.0 * kappa) + 9.0 / (128.0 * k2) + 225.0 / (3072.0 * k2 * kappa));
}

double inverse_bessel_ratio(double r, double kappa_max) {
    if (!(r > 0.0)) return 0.0;
    if (r >= bessel_ratio(kappa_max)) return kappa_max;
    double lo = 0.0, hi = kappa_max;
    while (hi - lo > 1e-8 * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        (bessel_ratio(mid) < r ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double von_mises_log_density(double degrees, double mu, double kappa) {
    return kappa * std::cos((degrees - mu) * kDeg) - std::log(2.0 * kPi) - log_bessel_i0(kappa);
}

double VonMisesMixture::log_density(double degrees) const {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(components.size());
    for (const auto& c : components) {
        if (c.weight <= 0.0) continue;
        terms.push_back(std::log(c.weight) + von_mises_log_density(degrees, c.mu, c.kappa));
        best = std::max(best, terms.back());
    }
    if (terms.empty()) return best;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - best);
    return best + std::log(sum);
}

double VonMisesMixture::log_likelihood(std::span<const double> degrees) const {
    double ll = 0.0;
    for (double d : degrees) ll += log_density(d);
    return ll;
}

double VonMisesMixture::sample(std::mt19937_64& rng) const {
    double u = uniform01(rng);
    const VonMisesComponent* chosen = &components.back();
    for (const auto& c : components) {
        if (u < c.weight) {
            chosen = &c;
            break;
        }
        u -= c.weight;
    }
    return draw_von_mises(chosen->mu, chosen->kappa, rng);
}

namespace {

struct Cluster {
    double c = 0.0, s = 0.0, n = 0.0;
};

// Seeded k-means on unit vectors; returns the hard assignment.
std::vector<std::size_t> kmeans_unit_circle(std::span<const double> degrees, std::size_t k, Seed seed) {
    const auto n = degrees.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::cos(degrees[i] * kDeg);
        ys[i] = std::sin(degrees[i] * kDeg);
    }
    std::mt19937_64 rng(seed);
    // k-means++ seeding
    std::vector<double> cx, cy;
    const auto first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    cx.push_back(xs[first]);
    cy.push_back(ys[first]);
    std::vector<double> d2(n);
    while (cx.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cx.size(); ++c)
                best = std::min(best, (xs[i] - cx[c]) * (xs[i] - cx[c]) + (ys[i] - cy[c]) * (ys[i] - cy[c]));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = uniform01(rng) * total;
            for (pick = 0; pick + 1 < n && u >= d2[pick]; ++pick) u -= d2[pick];
        } else {
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        }
        cx.push_back(xs[pick]);
        cy.push_back(ys[pick]);
    }

    std::vector<std::size_t> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best_c = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = (xs[i] - cx[c]) * (xs[i] - cx[c]) + (ys[i] - cy[c]) * (ys[i] - cy[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            changed = changed || assign[i] != best_c;
            assign[i] = best_c;
        }
        std::vector<Cluster> acc(k);
        for (std::size_t i = 0; i < n; ++i) {
            acc[assign[i]].c += xs[i];
            acc[assign[i]].s += ys[i];
            acc[assign[i]].n += 1.0;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (acc[c].n > 0.0) {
                cx[c] = acc[c].c / acc[c].n;
                cy[c] = acc[c].s / acc[c].n;
            }
        }
        if (!changed && iter > 0) break;
    }
    return assign;
}

}  // namespace

VonMisesMixture fit_von_mises_mixture(std::span<const double> degrees, std::size_t n_components,
                                      Seed seed, const EmOptions& options) {
    if (degrees.size() < 10) throw DataError("von Mises mixture needs at least 10 angles");
    if (n_components < 1) throw ParameterError("mixture needs at least one component");
    const auto n = degrees.size();
    const auto k = n_components;

    std::vector<double> cosv(n), sinv(n);
    for (std::size_t i = 0; i < n; ++i) {
        cosv[i] = std::cos(degrees[i] * kDeg);
        sinv[i] = std::sin(degrees[i] * kDeg);
    }

    // responsibilities, row-major n x k
    std::vector<double> resp(n * k, 0.0);
    const auto assign = k == 1 ? std::vector<std::size_t>(n, 0) : kmeans_unit_circle(degrees, k, seed);
    for (std::size_t i = 0; i < n; ++i) resp[i * k + assign[i]] = 1.0;

    VonMisesMixture mix;
    mix.components.resize(k);

    auto m_step = [&] {
        for (std::size_t c = 0; c < k; ++c) {
            double sc = 0.0, ss = 0.0, sn = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp[i * k + c];
                sc += r * cosv[i];
                ss += r * sinv[i];
                sn += r;
            }
            auto& comp = mix.components[c];
            comp.weight = sn / static_cast<double>(n);
            if (sn <= 1e-12) {
                comp.weight = 0.0;
                continue;
            }
            comp.mu = wrap_degrees(std::atan2(ss, sc) / kDeg);
            const double rbar = std::min(1.0, std::hypot(sc, ss) / sn);
            comp.kappa = inverse_bessel_ratio(rbar, options.kappa_max);
        }
    };

    // Returns the log-likelihood under the current parameters and refreshes resp.
    std::vector<double> logp(k);
    auto e_step = [&] {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const auto& comp = mix.components[c];
                logp[c] = comp.weight > 0.0
                              ? std::log(comp.weight) + von_mises_log_density(degrees[i], comp.mu, comp.kappa)
                              : -std::numeric_limits<double>::infinity();
                best = std::max(best, logp[c]);
            }
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum += std::exp(logp[c] - best);
            const double lse = best + std::log(sum);
            for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(logp[c] - lse);
            ll += lse;
        }
        return ll;
    };

    m_step();
    double ll = e_step();
    mix.loglik_trace.push_back(ll);
    for (int it = 0; it < options.max_iterations; ++it) {
        m_step();
        const double next = e_step();
        mix.loglik_trace.push_back(next);
        mix.iterations = it + 1;
        const double delta = next - ll;
        ll = next;
        if (delta < options.tolerance) break;
    }
    return mix;
}

double draw_von_mises(double mu, double kappa, std::mt19937_64& rng) {
    if (kappa < 1e-8) return wrap_degrees(360.0 * uniform01(rng));
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    double f = 0.0;
    for (;;) {
        const double u1 = uniform01(rng);
        const double u2 = uniform01(rng);
        const double z = std::cos(kPi * u1);
        f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0) break;
        if (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double u3 = uniform01(rng);
    const double theta = std::acos(std::clamp(f, -1.0, 1.0)) / kDeg;
    return wrap_degrees(mu + (u3 > 0.5 ? theta : -theta));
}

std::vector<double> sample_von_mises(double mu, double kappa, std::size_t n, Seed seed) {
    if (kappa < 0.0) throw ParameterError("kappa must be non-negative");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = draw_von_mises(mu, kappa, rng);
    return out;
}

}  // namespace stinger::circular
