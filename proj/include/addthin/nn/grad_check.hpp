#pragma once

#include <functional>
#include <span>

#include "addthin/nn/parameters.hpp"
#include "addthin/rng.hpp"

namespace addthin::nn {

/// Scalar objective that also accumulates its analytic gradient into `grad`
/// (a zeroed buffer with the ParameterSet layout). `grad` is empty when only
/// the value is needed.
using Objective = std::function<double(const ParameterSet& params, std::span<double> grad)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose stencil was shrunk because it straddled a kink.
  std::size_t refined = 0;
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t n_coords = 100;
  /// Denominator floor of the relative error.
  double abs_floor = 1e-6;
  /// Multiply the floor by max(1, |f|), the scale of finite-difference round-off.
  bool floor_scales_with_objective = false;
  /// A stencil whose forward and backward slopes differ by more than
  /// kink_tolerance (relative) is halved, at most max_halvings times; the
  /// stencil with the smallest slope gap supplies the estimate.
  int max_halvings = 0;
  double kink_tolerance = 1e-4;
};

/// Compares the analytic gradient with central differences on a random
/// subsample of `n_coords` coordinates (all coordinates if fewer exist).
/// Relative error is |a - n| / max(|a|, |n|, abs_floor).
GradCheckResult grad_check(const Objective& op, ParameterSet& params, RngStream& rng, const GradCheckOptions& options);
GradCheckResult grad_check(const Objective& op, ParameterSet& params, double epsilon, RngStream& rng,
                           std::size_t n_coords = 100, double abs_floor = 1e-6);

}  // namespace addthin::nn
