#pragma once

#include <cstddef>
#include <vector>

#include "addthin/rng.hpp"

namespace addthin {

/// Unnormalized mixture of Gaussians truncated to [0, 1]:
///   lambda(t) = count_scale * sum_j w_j TruncNormal(t; mu_j, sigma_j).
struct MixtureIntensityParams {
  std::vector<double> weights;
  std::vector<double> locations;
  std::vector<double> scales;
  double count_scale = 0.0;

  [[nodiscard]] std::size_t n_components() const { return weights.size(); }
};

/// Mass of N(mu, sigma^2) on [0, 1], floored at kMinComponentMass.
double truncated_normal_mass(double mu, double sigma);
/// Gaussian density renormalized to integrate to one on [0, 1].
double truncated_normal_pdf(double t, double mu, double sigma);
/// CDF of the truncated density on [0, 1].
double truncated_normal_cdf(double t, double mu, double sigma);
/// Inverse-CDF draw from the truncated density; result in (0, 1].
double sample_truncated_normal(double mu, double sigma, RngStream& rng);

inline constexpr double kMinComponentMass = 1e-12;

double intensity_AC(double t, const MixtureIntensityParams& params);
/// Closed form: every truncated component carries unit mass on [0, 1].
double integral_AC(const MixtureIntensityParams& params);
/// CDF of the normalized intensity lambda / integral_AC on [0, 1].
double mixture_cdf(double t, const MixtureIntensityParams& params);

}  // namespace addthin
