#include "addthin/tpp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace addthin {

EventSequence sample_hpp(double rate, double t_max, RngStream& rng) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("sample_hpp: rate must be nonnegative, got " + std::to_string(rate));
  }
  if (!(t_max > 0.0)) {
    throw std::invalid_argument("sample_hpp: t_max must be positive, got " + std::to_string(t_max));
  }
  if (rate == 0.0) return EventSequence(t_max);
  std::poisson_distribution<long> count_dist(rate * t_max);
  const long count = count_dist(rng);
  std::vector<double> times(static_cast<std::size_t>(count));
  for (auto& t : times) t = t_max * rng.uniform_pos();
  return EventSequence::from_unsorted(std::move(times), t_max);
}

ThinResult thin(const EventSequence& seq, double keep_prob, RngStream& rng) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) {
    throw std::invalid_argument("thin: keep_prob must be in [0, 1], got " + std::to_string(keep_prob));
  }
  std::vector<double> kept;
  std::vector<double> removed;
  kept.reserve(seq.size());
  for (double t : seq.times()) {
    // The draw is consumed even for keep_prob in {0, 1} so stream positions
    // do not depend on the probability value.
    const bool keep = rng.uniform() < keep_prob;
    (keep ? kept : removed).push_back(t);
  }
  return {EventSequence(std::move(kept), seq.t_max()), EventSequence(std::move(removed), seq.t_max())};
}

EventSequence superpose(const EventSequence& a, const EventSequence& b) {
  if (a.t_max() != b.t_max()) {
    throw std::invalid_argument("superpose: mismatched t_max " + std::to_string(a.t_max()) + " vs " +
                                std::to_string(b.t_max()));
  }
  std::vector<double> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
             std::back_inserter(merged));
  return {std::move(merged), a.t_max()};
}

double poisson_nll(const std::function<double(double)>& intensity, double integral,
                   const EventSequence& seq) {
  double nll = integral;
  for (double t : seq.times()) {
    const double value = intensity(t);
    if (!(value > 0.0)) {
      throw std::domain_error("poisson_nll: intensity " + std::to_string(value) + " at t=" +
                              std::to_string(t) + " is not positive");
    }
    nll -= std::log(value);
  }
  return nll;
}

EventSequence rescale(const EventSequence& seq, double target_t_max) {
  if (!(target_t_max > 0.0)) {
    throw std::invalid_argument("rescale: target_t_max must be positive");
  }
  const double factor = target_t_max / seq.t_max();
  std::vector<double> times(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    times[i] = std::min(seq[i] * factor, target_t_max);
  }
  return {std::move(times), target_t_max};
}

}  // namespace addthin
