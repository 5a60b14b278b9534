#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/mixture.hpp"
#include "addthin/model.hpp"
#include "addthin/rng.hpp"
#include "addthin/schedule.hpp"

namespace addthin {

/// Estimate of t^(0) given t^(n): per-event keep probabilities plus the law
/// of the clean events missing from t^(n), either as an intensity (learned
/// model) or as an explicit point set (exact posterior).
struct CleanEstimate {
  std::vector<double> keep_prob;
  std::variant<MixtureIntensityParams, EventSequence> missing;
};

class ReverseModel {
 public:
  virtual ~ReverseModel() = default;
  [[nodiscard]] virtual CleanEstimate estimate_clean(const EventSequence& tn, int n) const = 0;
};

/// Wraps a trained Denoiser, optionally conditioned on a precomputed history embedding.
class NeuralReverseModel final : public ReverseModel {
 public:
  explicit NeuralReverseModel(const Denoiser& model, std::optional<nn::RowVector> history_embed = std::nullopt);
  [[nodiscard]] CleanEstimate estimate_clean(const EventSequence& tn, int n) const override;

 private:
  const Denoiser& model_;
  nn::RowVector history_embed_;
};

/// Reveals the true t^(0); reproduces the exact posterior q(t^(n-1) | t^(0), t^(n)).
class OracleReverseModel final : public ReverseModel {
 public:
  explicit OracleReverseModel(EventSequence t0) : t0_(std::move(t0)) {}
  [[nodiscard]] CleanEstimate estimate_clean(const EventSequence& tn, int n) const override;

 private:
  EventSequence t0_;
};

/// Poisson(scale * integral_AC) events drawn i.i.d. from the normalized mixture.
EventSequence sample_mixture_sequence(const MixtureIntensityParams& params, double scale, RngStream& rng);

/// Draws the missing clean events scaled by `scale` (thinning for point sets).
EventSequence sample_missing(const CleanEstimate& estimate, double scale, RngStream& rng);

/// One reverse step t^(n) -> t^(n-1) for 2 <= n <= N.
EventSequence denoise_step(const EventSequence& tn, int n, const ReverseModel& model, const NoiseSchedule& sched,
                           RngStream& rng);

/// Final prediction of t^(0) from t^(1).
EventSequence finalize(const EventSequence& t1, const ReverseModel& model, RngStream& rng);

/// Full reverse chain starting from HPP(lambda_hpp) noise on (0, 1].
EventSequence sample_unconditional(const ReverseModel& model, const NoiseSchedule& sched, RngStream& rng);

/// Reverse chain starting from an explicit t^(n_start); returns t^(0).
EventSequence run_reverse_chain(EventSequence start, int n_start, const ReverseModel& model,
                                const NoiseSchedule& sched, RngStream& rng);

/// Events in (history.t_max(), history.t_max() + horizon] sampled by a
/// conditional model given the events in (0, history.t_max()].
EventSequence forecast(const Denoiser& model, const NoiseSchedule& sched, const EventSequence& history,
                       double horizon, RngStream& rng);

}  // namespace addthin
