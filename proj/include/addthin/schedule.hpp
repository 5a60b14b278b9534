#pragma once

#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/rng.hpp"

namespace addthin {

/// Per-step keep probabilities of the add/thin forward chain.
///
/// alpha_bar[0] = 1 and alpha_bar[n] = prod_{j<=n} alpha[j]; alpha is stored
/// 1-based (alpha[0] is unused and set to 1).
struct NoiseSchedule {
  int n_steps = 0;
  double lambda_hpp = 1.0;
  double cosine_offset = 0.008;
  std::vector<double> alpha_bar;
  std::vector<double> alpha;

  /// Builds a schedule from explicit cumulative keep probabilities.
  static NoiseSchedule from_alpha_bar(std::vector<double> alpha_bar, double lambda_hpp);

  void check_step(int n) const;
};

/// Cosine schedule alpha_bar[n] = f(n)/f(0), f(n) = cos^2(((n/N + s)/(1 + s)) pi/2),
/// with every per-step alpha clamped to at least `min_alpha`.
NoiseSchedule cosine_schedule(int n_steps, double lambda_hpp = 1.0, double s = 0.008,
                              double min_alpha = 1e-3);

/// A noised sequence plus, for each event, whether it survived from t0.
struct NoisySequence {
  EventSequence events;
  std::vector<bool> from_original;
};

/// Closed-form draw of t^(n): thin t0 with alpha_bar[n] and superpose an HPP
/// with rate (1 - alpha_bar[n]) lambda_hpp.
NoisySequence corrupt(const EventSequence& t0, int n, const NoiseSchedule& sched, RngStream& rng);

/// One forward step t^(n-1) -> t^(n): thin with alpha[n], add HPP((1 - alpha[n]) lambda_hpp).
EventSequence forward_step(const EventSequence& prev, int n, const NoiseSchedule& sched, RngStream& rng);

}  // namespace addthin
