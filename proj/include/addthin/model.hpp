#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/mixture.hpp"
#include "addthin/nn/layers.hpp"
#include "addthin/nn/parameters.hpp"
#include "addthin/rng.hpp"
#include "addthin/schedule.hpp"

namespace addthin {

struct ModelConfig {
  int hidden_dim = 32;
  int n_components = 16;
  int n_steps = 100;
  bool conditional = false;
  /// Inputs to the sinusoidal embeddings are multiplied by this factor.
  double embed_scale = 1000.0;
  double max_period = 10000.0;
  double sigma_floor = 1e-3;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Per-event and sequence-level features of a noisy sequence t^(n).
struct EventEncoding {
  nn::Matrix events;    // e_i, K x d
  nn::Matrix context;   // c_i, K x d
  nn::RowVector global;  // mean of context rows, learned default when K = 0
  nn::RowVector step_embed;
  nn::RowVector history_embed;  // zero when unconditional
};

struct LossBreakdown {
  double nll = 0.0;
  double bce = 0.0;
  double total = 0.0;
};

/// The denoising network: classifies which events of t^(n) belong to t^(0)
/// and parameterizes the intensity of the missing clean events.
///
/// A `history` argument is a sequence expressed in forecast-window units
/// (window length 1, history ending at its t_max). It is only consulted
/// when the model was built with `conditional = true`.
class Denoiser {
 public:
  Denoiser(const ModelConfig& config, std::uint64_t seed);
  /// Adopts trained parameters; throws if names or shapes do not match `config`.
  Denoiser(const ModelConfig& config, const nn::ParameterSet& params);

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  [[nodiscard]] const nn::ParameterSet& params() const { return params_; }
  nn::ParameterSet& params() { return params_; }

  [[nodiscard]] nn::RowVector encode_history(const EventSequence* history) const;
  [[nodiscard]] EventEncoding encode(const EventSequence& tn, int n, const EventSequence* history = nullptr) const;
  [[nodiscard]] EventEncoding encode(const EventSequence& tn, int n, const nn::RowVector& history_embed) const;

  /// Probability, per event of t^(n), that it is a surviving clean event.
  [[nodiscard]] std::vector<double> classify_keep(const EventEncoding& enc) const;
  /// Mixture intensity for the missing clean events with count scale `count`.
  [[nodiscard]] MixtureIntensityParams mixture_params(const EventEncoding& enc, double count) const;

  /// Count scale used by the denoiser for a noisy sequence with `n_events`
  /// events; never zero so an empty t^(n) can still propose events.
  static double count_scale(std::size_t n_events);

  /// Training loss for a fresh corruption t^(n) = corrupt(t0, n).
  LossBreakdown loss(const EventSequence& t0, int n, const NoiseSchedule& sched, RngStream& rng,
                     const EventSequence* history = nullptr, std::span<double> grad = {}) const;
  /// Training loss for a given corruption; accumulates into `grad` when non-empty.
  LossBreakdown loss_given(const EventSequence& t0, const NoisySequence& tn, int n,
                           const EventSequence* history = nullptr, std::span<double> grad = {}) const;

 private:
  struct Layout {
    nn::Linear event_proj;
    nn::ConvEncoder conv;
    std::size_t empty_context = 0;
    nn::Mlp step_mlp;
    nn::Mlp classifier;
    nn::Mlp head_weight;
    nn::Mlp head_location;
    nn::Mlp head_scale;
    std::optional<nn::Gru> gru;
  };
  struct Cache;

  static Layout build(const ModelConfig& config, nn::ParameterSet& params, RngStream& rng);
  void forward(const EventSequence& tn, int n, const EventSequence* history, const nn::RowVector* history_embed,
               Cache& cache, bool keep_intermediates) const;
  [[nodiscard]] nn::Matrix history_features(const EventSequence& history) const;

  ModelConfig config_;
  nn::ParameterSet params_;
  Layout layout_;
};

}  // namespace addthin
