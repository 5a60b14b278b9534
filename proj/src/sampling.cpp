#include "addthin/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "addthin/errors.hpp"
#include "addthin/posterior.hpp"
#include "addthin/tpp.hpp"

namespace addthin {
namespace {

constexpr double kMaxExpectedCount = 1e7;

}  // namespace

NeuralReverseModel::NeuralReverseModel(const Denoiser& model, std::optional<nn::RowVector> history_embed)
    : model_(model),
      history_embed_(history_embed ? *history_embed : nn::RowVector::Zero(model.config().hidden_dim)) {}

CleanEstimate NeuralReverseModel::estimate_clean(const EventSequence& tn, int n) const {
  const auto enc = model_.encode(tn, n, history_embed_);
  return {model_.classify_keep(enc), model_.mixture_params(enc, Denoiser::count_scale(tn.size()))};
}

CleanEstimate OracleReverseModel::estimate_clean(const EventSequence& tn, int n) const {
  const auto parts = decompose(t0_, tn, n);
  CleanEstimate est;
  est.keep_prob.reserve(tn.size());
  std::size_t j = 0;
  for (double t : tn.times()) {
    while (j < parts.kept.size() && parts.kept[j] < t) ++j;
    est.keep_prob.push_back(j < parts.kept.size() && parts.kept[j] == t ? 1.0 : 0.0);
  }
  est.missing = parts.missing;
  return est;
}

EventSequence sample_mixture_sequence(const MixtureIntensityParams& params, double scale, RngStream& rng) {
  const double mean = scale * integral_AC(params);
  if (!(mean > 0.0)) return EventSequence(1.0);
  if (!std::isfinite(mean) || mean > kMaxExpectedCount) {
    throw NumericalFailure("sample_mixture_sequence: expected count is not finite or exceeds the sampling limit");
  }
  std::poisson_distribution<long> count_dist(mean);
  const long count = count_dist(rng);
  std::discrete_distribution<std::size_t> component(params.weights.begin(), params.weights.end());
  std::vector<double> times(static_cast<std::size_t>(count));
  for (auto& t : times) {
    const std::size_t j = component(rng);
    t = sample_truncated_normal(params.locations[j], params.scales[j], rng);
  }
  return EventSequence::from_unsorted(std::move(times), 1.0);
}

EventSequence sample_missing(const CleanEstimate& estimate, double scale, RngStream& rng) {
  if (const auto* mixture = std::get_if<MixtureIntensityParams>(&estimate.missing)) {
    return sample_mixture_sequence(*mixture, scale, rng);
  }
  return thin(std::get<EventSequence>(estimate.missing), scale, rng).kept;
}

namespace {

// Bernoulli draws with the classifier probabilities; returns (kept, rest).
ThinResult keep_by_probability(const EventSequence& tn, const std::vector<double>& probs, RngStream& rng) {
  std::vector<double> kept;
  std::vector<double> rest;
  for (std::size_t i = 0; i < tn.size(); ++i) {
    (rng.uniform() < probs[i] ? kept : rest).push_back(tn[i]);
  }
  return {EventSequence(std::move(kept), tn.t_max()), EventSequence(std::move(rest), tn.t_max())};
}

}  // namespace

EventSequence denoise_step(const EventSequence& tn, int n, const ReverseModel& model, const NoiseSchedule& sched,
                           RngStream& rng) {
  if (n < 2 || n > sched.n_steps) throw std::invalid_argument("denoise_step: n must be in [2, N]");
  const auto estimate = model.estimate_clean(tn, n);
  auto [from_b, rest] = keep_by_probability(tn, estimate.keep_prob, rng);
  const auto from_c = sample_missing(estimate, keep_prob_C(sched, n), rng);
  const auto from_d = sample_hpp(rate_D(sched, n), tn.t_max(), rng);
  const auto from_e = thin(rest, keep_prob_E(sched, n), rng).kept;
  return superpose(superpose(from_b, from_c), superpose(from_d, from_e));
}

EventSequence finalize(const EventSequence& t1, const ReverseModel& model, RngStream& rng) {
  const auto estimate = model.estimate_clean(t1, 1);
  const auto from_b = keep_by_probability(t1, estimate.keep_prob, rng).kept;
  return superpose(from_b, sample_missing(estimate, 1.0, rng));
}

EventSequence run_reverse_chain(EventSequence current, int n_start, const ReverseModel& model,
                                const NoiseSchedule& sched, RngStream& rng) {
  for (int n = n_start; n >= 2; --n) current = denoise_step(current, n, model, sched, rng);
  return finalize(current, model, rng);
}

EventSequence sample_unconditional(const ReverseModel& model, const NoiseSchedule& sched, RngStream& rng) {
  return run_reverse_chain(sample_hpp(sched.lambda_hpp, 1.0, rng), sched.n_steps, model, sched, rng);
}

EventSequence forecast(const Denoiser& model, const NoiseSchedule& sched, const EventSequence& history,
                       double horizon, RngStream& rng) {
  if (!model.config().conditional) {
    throw UnsupportedOperation("forecast: checkpoint holds an unconditional model");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("forecast: horizon must be positive");
  const double start = history.t_max();
  const auto in_window_units = rescale(history, start / horizon);
  const NeuralReverseModel conditioned(model, model.encode_history(&in_window_units));
  const auto window = sample_unconditional(conditioned, sched, rng);
  std::vector<double> times(window.size());
  const double first_after = std::nextafter(start, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < window.size(); ++i) {
    times[i] = std::min(std::max(start + window[i] * horizon, first_after), start + horizon);
  }
  return {std::move(times), start + horizon};
}

}  // namespace addthin
