#include "addthin/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace addthin::nn {

GradCheckResult grad_check(const Objective& op, ParameterSet& params, RngStream& rng, const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be positive");
  if (options.max_halvings < 0) throw std::invalid_argument("grad_check: max_halvings must be >= 0");
  std::vector<double> analytic(params.size(), 0.0);
  const double center = op(params, analytic);
  const double floor =
      options.abs_floor * (options.floor_scales_with_objective ? std::max(1.0, std::abs(center)) : 1.0);

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > options.n_coords) {
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < options.n_coords; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(coords.size() - i));
      std::swap(coords[i], coords[std::min(j, coords.size() - 1)]);
    }
    coords.resize(options.n_coords);
  }

  GradCheckResult result;
  auto values = params.values();
  for (const auto idx : coords) {
    const double original = values[idx];
    double h = options.epsilon;
    double numeric = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= options.max_halvings; ++halving, h *= 0.5) {
      values[idx] = original + h;
      const double plus = op(params, {});
      values[idx] = original - h;
      const double minus = op(params, {});
      values[idx] = original;
      if (options.max_halvings == 0) {
        numeric = (plus - minus) / (2.0 * h);
        break;
      }
      // Keep the stencil whose one-sided slopes agree best.
      const double forward = (plus - center) / h;
      const double backward = (center - minus) / h;
      const double gap = std::abs(forward - backward);
      if (gap < best_gap) {
        best_gap = gap;
        numeric = (plus - minus) / (2.0 * h);
      }
      if (gap <= options.kink_tolerance * std::max({std::abs(forward), std::abs(backward), floor})) break;
      if (halving == 0) ++result.refined;
    }

    const double a = analytic[idx];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    if (err > result.max_relative_error || result.checked == 0) {
      result.max_relative_error = std::max(err, result.max_relative_error);
      result.worst_index = idx;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

GradCheckResult grad_check(const Objective& op, ParameterSet& params, double epsilon, RngStream& rng,
                           std::size_t n_coords, double abs_floor) {
  GradCheckOptions options;
  options.epsilon = epsilon;
  options.n_coords = n_coords;
  options.abs_floor = abs_floor;
  return grad_check(op, params, rng, options);
}

}  // namespace addthin::nn
