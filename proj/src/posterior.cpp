#include "addthin/posterior.hpp"

#include <algorithm>
#include <stdexcept>

#include "addthin/tpp.hpp"

namespace addthin {

PosteriorDecomposition decompose(const EventSequence& t0, const EventSequence& tn, int n) {
  if (t0.t_max() != tn.t_max()) throw std::invalid_argument("decompose: mismatched t_max");
  std::vector<double> kept;
  std::vector<double> missing;
  std::vector<double> added;
  std::set_intersection(t0.times().begin(), t0.times().end(), tn.times().begin(), tn.times().end(),
                        std::back_inserter(kept));
  std::set_difference(t0.times().begin(), t0.times().end(), tn.times().begin(), tn.times().end(),
                      std::back_inserter(missing));
  std::set_difference(tn.times().begin(), tn.times().end(), t0.times().begin(), t0.times().end(),
                      std::back_inserter(added));
  const double t_max = t0.t_max();
  return {EventSequence(std::move(kept), t_max), EventSequence(std::move(missing), t_max),
          EventSequence(std::move(added), t_max), n};
}

double keep_prob_C(const NoiseSchedule& sched, int n) {
  sched.check_step(n);
  // A noiseless schedule (alpha_bar[n] = 1) cannot have thinned anything yet.
  if (!(sched.alpha_bar[n] < 1.0)) return 1.0;
  const double p = (sched.alpha_bar[n - 1] - sched.alpha_bar[n]) / (1.0 - sched.alpha_bar[n]);
  return std::clamp(p, 0.0, 1.0);
}

double keep_prob_E(const NoiseSchedule& sched, int n) {
  sched.check_step(n);
  if (!(sched.alpha_bar[n] < 1.0)) return 0.0;
  const double p = (sched.alpha[n] - sched.alpha_bar[n]) / (1.0 - sched.alpha_bar[n]);
  return std::clamp(p, 0.0, 1.0);
}

double rate_D(const NoiseSchedule& sched, int n) {
  sched.check_step(n);
  return (1.0 - sched.alpha_bar[n - 1]) * (1.0 - sched.alpha[n]) * sched.lambda_hpp;
}

EventSequence sample_posterior(const EventSequence& t0, const EventSequence& tn, int n,
                               const NoiseSchedule& sched, RngStream& rng) {
  const auto parts = decompose(t0, tn, n);
  const auto from_c = thin(parts.missing, keep_prob_C(sched, n), rng).kept;
  const auto from_d = sample_hpp(rate_D(sched, n), t0.t_max(), rng);
  const auto from_e = thin(parts.added, keep_prob_E(sched, n), rng).kept;
  return superpose(superpose(parts.kept, from_c), superpose(from_d, from_e));
}

}  // namespace addthin
