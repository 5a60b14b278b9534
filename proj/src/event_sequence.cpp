#include "addthin/event_sequence.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace addthin {

EventSequence::EventSequence(double t_max) : t_max_(t_max) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument("EventSequence: t_max must be positive and finite, got " +
                                std::to_string(t_max));
  }
}

EventSequence::EventSequence(std::vector<double> times, double t_max) : EventSequence(t_max) {
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (!(t > 0.0) || !(t <= t_max)) {
      throw std::invalid_argument("EventSequence: time " + std::to_string(t) + " at index " +
                                  std::to_string(i) + " outside (0, " + std::to_string(t_max) + "]");
    }
    if (i > 0 && t < times[i - 1]) {
      throw std::invalid_argument("EventSequence: times not sorted at index " + std::to_string(i));
    }
    if (i > 0 && t == times[i - 1]) ++dropped;
  }
  if (dropped > 0) {
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::cerr << "warning: EventSequence dropped " << dropped << " duplicate time(s)\n";
  }
  times_ = std::move(times);
}

EventSequence EventSequence::from_unsorted(std::vector<double> times, double t_max) {
  std::sort(times.begin(), times.end());
  return {std::move(times), t_max};
}

std::vector<double> EventSequence::between(double lo, double hi) const {
  auto first = std::upper_bound(times_.begin(), times_.end(), lo);
  auto last = std::upper_bound(first, times_.end(), hi);
  return {first, last};
}

}  // namespace addthin
