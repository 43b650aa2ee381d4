#pragma once

#include <random>
#include <span>
#include <vector>

#include "stinger/types.hpp"

namespace stinger::circular {

/// Reduces an angle in degrees to [0, 360).
double wrap_degrees(double degrees);

/// Signed shortest rotation from `from` to `to`, in (-180, 180].
double signed_difference(double from, double to);

/// Point at fraction `t` along the shorter arc from `a` to `b`.
double interpolate(double a, double b, double t);

/// Length of the mean unit vector of the sample; 0 for an empty sample.
double mean_resultant_length(std::span<const double> degrees);
double circular_mean(std::span<const double> degrees);

/// A(kappa) = I1(kappa) / I0(kappa).
double bessel_ratio(double kappa);
double log_bessel_i0(double kappa);

inline constexpr double kKappaMax = 1e4;

/// Solves A(kappa) = r on [0, kappa_max] to 1e-8.
double inverse_bessel_ratio(double r, double kappa_max = kKappaMax);

struct VonMisesComponent {
    double mu = 0.0;     // degrees
    double kappa = 0.0;  // >= 0
    double weight = 1.0;
};

double von_mises_log_density(double degrees, double mu, double kappa);

struct VonMisesMixture {
    std::vector<VonMisesComponent> components;
    std::vector<double> loglik_trace;  // one entry per EM iteration, starting at the initial fit
    int iterations = 0;

    double log_density(double degrees) const;
    double log_likelihood(std::span<const double> degrees) const;
    double sample(std::mt19937_64& rng) const;
};

struct EmOptions {
    int max_iterations = 200;
    double tolerance = 1e-6;
    double kappa_max = kKappaMax;
};

/// Expectation-maximization fit, initialized from a seeded k-means on the
/// (cos, sin) embedding. Requires at least ten angles.
VonMisesMixture fit_von_mises_mixture(std::span<const double> degrees, std::size_t n_components,
                                      Seed seed, const EmOptions& options = {});

/// One draw by the Best-Fisher rejection scheme; uniform when kappa is 0.
double draw_von_mises(double mu, double kappa, std::mt19937_64& rng);
std::vector<double> sample_von_mises(double mu, double kappa, std::size_t n, Seed seed);

}  // namespace stinger::circular
