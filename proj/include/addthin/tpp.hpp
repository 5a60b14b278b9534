#pragma once

#include <functional>
#include <utility>

#include "addthin/event_sequence.hpp"
#include "addthin/rng.hpp"

namespace addthin {

/// Homogeneous Poisson process with constant `rate` on (0, t_max].
EventSequence sample_hpp(double rate, double t_max, RngStream& rng);

struct ThinResult {
  EventSequence kept;
  EventSequence removed;
};

/// Independent thinning: each event is kept with probability `keep_prob`.
ThinResult thin(const EventSequence& seq, double keep_prob, RngStream& rng);

/// Sorted merge of two sequences on the same interval.
EventSequence superpose(const EventSequence& a, const EventSequence& b);

/// Poisson-process negative log-likelihood -sum log intensity(t_i) + integral.
/// Throws std::domain_error if the intensity is not positive at an event.
double poisson_nll(const std::function<double(double)>& intensity, double integral,
                   const EventSequence& seq);

/// Linear map of the sequence onto (0, target_t_max].
EventSequence rescale(const EventSequence& seq, double target_t_max);

}  // namespace addthin
