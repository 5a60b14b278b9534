#pragma once

#include "addthin/event_sequence.hpp"
#include "addthin/rng.hpp"
#include "addthin/schedule.hpp"

namespace addthin {

/// Disjoint split of t^(0) and t^(n) used by the exact reverse step.
///   kept       = t0 ∩ tn          (case B)
///   missing    = t0 \ tn          (cases A ∪ C)
///   added      = tn \ t0          (cases E ∪ F)
struct PosteriorDecomposition {
  EventSequence kept;
  EventSequence missing;
  EventSequence added;
  int step = 0;
};

/// Membership is decided by exact time equality; corrupt() copies original
/// times bit-identically.
PosteriorDecomposition decompose(const EventSequence& t0, const EventSequence& tn, int n);

/// Probability that a point of t0 \ tn was still present at step n-1.
double keep_prob_C(const NoiseSchedule& sched, int n);
/// Probability that a point of tn \ t0 was already present at step n-1.
double keep_prob_E(const NoiseSchedule& sched, int n);
/// Rate of points added before step n-1 and removed at step n.
double rate_D(const NoiseSchedule& sched, int n);

/// Draw t^(n-1) ~ q(. | t0, tn).
EventSequence sample_posterior(const EventSequence& t0, const EventSequence& tn, int n,
                               const NoiseSchedule& sched, RngStream& rng);

}  // namespace addthin
