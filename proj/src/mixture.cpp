#include "addthin/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace addthin {
namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

}  // namespace

double truncated_normal_mass(double mu, double sigma) {
  const double a = -mu / sigma;
  const double b = (1.0 - mu) / sigma;
  // Pick the tail that keeps precision when both bounds sit far on one side.
  const double mass = a > 0.0 ? std_normal_sf(a) - std_normal_sf(b) : std_normal_cdf(b) - std_normal_cdf(a);
  return std::max(mass, kMinComponentMass);
}

double truncated_normal_pdf(double t, double mu, double sigma) {
  const double u = (t - mu) / sigma;
  return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * sigma * truncated_normal_mass(mu, sigma));
}

double truncated_normal_cdf(double t, double mu, double sigma) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = -mu / sigma;
  const double x = (t - mu) / sigma;
  const double part = a > 0.0 ? std_normal_sf(a) - std_normal_sf(x) : std_normal_cdf(x) - std_normal_cdf(a);
  return std::clamp(part / truncated_normal_mass(mu, sigma), 0.0, 1.0);
}

double sample_truncated_normal(double mu, double sigma, RngStream& rng) {
  const double u = rng.uniform();
  const double a = -mu / sigma;
  const double b = (1.0 - mu) / sigma;
  double x = 0.0;
  if (a > 0.0) {
    // Upper tail: invert the survival function.
    const double sa = std_normal_sf(a);
    const double sb = std_normal_sf(b);
    const double q = sa - u * (sa - sb);
    x = q > 0.0 ? std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q) : a;
  } else if (b < 0.0) {
    // Lower tail: mirror of the above.
    const double ca = std_normal_cdf(a);
    const double cb = std_normal_cdf(b);
    const double p = ca + u * (cb - ca);
    x = p > 0.0 ? -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p) : b;
  } else {
    const double ca = std_normal_cdf(a);
    const double cb = std_normal_cdf(b);
    const double p = std::clamp(ca + u * (cb - ca), 1e-300, 1.0 - 1e-16);
    x = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  const double t = mu + sigma * x;
  return std::clamp(t, std::nextafter(0.0, 1.0), 1.0);
}

double intensity_AC(double t, const MixtureIntensityParams& params) {
  if (params.count_scale == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < params.n_components(); ++j) {
    total += params.weights[j] * truncated_normal_pdf(t, params.locations[j], params.scales[j]);
  }
  return params.count_scale * total;
}

double integral_AC(const MixtureIntensityParams& params) {
  double total = 0.0;
  for (double w : params.weights) total += w;
  return params.count_scale * total;
}

double mixture_cdf(double t, const MixtureIntensityParams& params) {
  double total = 0.0;
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < params.n_components(); ++j) {
    total += params.weights[j] * truncated_normal_cdf(t, params.locations[j], params.scales[j]);
    weight_sum += params.weights[j];
  }
  return weight_sum > 0.0 ? total / weight_sum : 0.0;
}

}  // namespace addthin
