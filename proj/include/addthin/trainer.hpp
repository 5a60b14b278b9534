#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/model.hpp"
#include "addthin/schedule.hpp"

namespace addthin {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 500;
  /// Validation evaluations without improvement before stopping.
  int patience = 20;
  int validation_samples = 200;
  /// Epochs between validation evaluations.
  int validation_interval = 1;
  int n_steps = 100;
  int n_components = 16;
  int hidden_dim = 32;
  std::uint64_t seed = 0;
  bool conditional = false;
  /// Forecast window length in data time units (conditional training only).
  double horizon = 10.0;
  /// Rate of the noise HPP per unit of data time; the canonical [0, 1] rate is
  /// hpp_rate times the data (or window) length.
  double hpp_rate = 1.0;
  /// Decay of the bias-corrected exponential moving average of the weights
  /// used for validation and the returned checkpoint; 0 uses the raw weights.
  double ema_decay = 0.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  [[nodiscard]] ModelConfig model_config() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               const AdamOptions& options = {});

/// True iff the best value (lowest) is followed by at least `patience` evaluations.
bool early_stop(std::span<const double> history, int patience);

struct MetricRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double validation = 0.0;
};

struct Checkpoint {
  TrainConfig train;
  NoiseSchedule schedule;
  ModelConfig model;
  /// Length of the observation interval of the training data.
  double data_t_max = 1.0;
  nn::ParameterSet params;
  std::vector<MetricRecord> history;
  int best_epoch = 0;

  [[nodiscard]] Denoiser denoiser() const { return {model, params}; }
};

/// A forecasting example: history on (0, start] and truth on (start, start + horizon].
struct WindowExample {
  EventSequence history;
  EventSequence truth;
};

WindowExample split_window(const EventSequence& seq, double start, double horizon);
/// Window start drawn uniformly from [horizon, t_max - horizon].
double draw_window_start(double t_max, double horizon, RngStream& rng);

/// Mean forecast-Wasserstein over one random window per sequence.
double validation_forecast_wasserstein(const Denoiser& model, const NoiseSchedule& sched,
                                       std::span<const EventSequence> sequences, double horizon, int n_windows,
                                       RngStream& rng);

/// Unconditional samples mapped onto (0, t_max].
std::vector<EventSequence> draw_samples(const Denoiser& model, const NoiseSchedule& sched, int count, double t_max,
                                        RngStream& rng);

using TrainLogger = std::function<void(const MetricRecord&)>;

/// Trains a fresh denoiser and returns the best checkpoint by validation
/// metric (MMD for density models, forecast-Wasserstein for conditional ones).
/// All sequences must share one t_max.
Checkpoint train(std::span<const EventSequence> train_split, std::span<const EventSequence> val_split,
                 const TrainConfig& config, const TrainLogger& logger = {});

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
/// Throws VersionMismatch for foreign format versions and std::runtime_error on corrupt files.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace addthin
