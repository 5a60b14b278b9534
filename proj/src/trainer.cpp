#include "addthin/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "addthin/errors.hpp"
#include "addthin/eval.hpp"
#include "addthin/sampling.hpp"
#include "addthin/tpp.hpp"

namespace addthin {
namespace {

constexpr std::uint64_t kEpochStream = 11;
constexpr std::uint64_t kValidationStream = 12;

void require(bool ok, const char* field, const char* rule) {
  if (!ok) throw std::invalid_argument(std::string("train config: ") + field + " " + rule);
}

EventSequence to_unit_window(const EventSequence& truth, double start, double horizon) {
  std::vector<double> times;
  times.reserve(truth.size());
  const double tiny = std::numeric_limits<double>::denorm_min();
  for (double t : truth.times()) times.push_back(std::clamp((t - start) / horizon, tiny, 1.0));
  return EventSequence::from_unsorted(std::move(times), 1.0);
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate", "must be positive");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(max_epochs >= 1, "max_epochs", "must be >= 1");
  require(patience >= 0, "patience", "must be >= 0");
  require(validation_samples >= 2, "validation_samples", "must be >= 2");
  require(validation_interval >= 1, "validation_interval", "must be >= 1");
  require(n_steps >= 1, "n_steps", "must be >= 1");
  require(n_components >= 1, "n_components", "must be >= 1");
  require(hidden_dim >= 2 && hidden_dim % 2 == 0, "hidden_dim", "must be even and >= 2");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon", "must be positive");
  require(hpp_rate > 0.0 && std::isfinite(hpp_rate), "hpp_rate", "must be positive");
  require(ema_decay >= 0.0 && ema_decay < 1.0, "ema_decay", "must be in [0, 1)");
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig mc;
  mc.hidden_dim = hidden_dim;
  mc.n_components = n_components;
  mc.n_steps = n_steps;
  mc.conditional = conditional;
  return mc;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               const AdamOptions& options) {
  if (grads.size() != params.size()) throw std::logic_error("adam_step: gradient size mismatch");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::logic_error("adam_step: optimizer state size mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = options.beta1 * state.m[i] + (1.0 - options.beta1) * grads[i];
    state.v[i] = options.beta2 * state.v[i] + (1.0 - options.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

bool early_stop(std::span<const double> history, int patience) {
  if (history.empty()) return false;
  const auto best = std::min_element(history.begin(), history.end()) - history.begin();
  const auto since_best = static_cast<std::ptrdiff_t>(history.size()) - 1 - best;
  return since_best >= patience;
}

WindowExample split_window(const EventSequence& seq, double start, double horizon) {
  if (!(start > 0.0) || !(horizon > 0.0) || start + horizon > seq.t_max() * (1.0 + 1e-12)) {
    throw std::invalid_argument("split_window: window outside the observation interval");
  }
  const auto times = seq.times();
  const auto split = std::upper_bound(times.begin(), times.end(), start);
  const auto stop = std::upper_bound(split, times.end(), start + horizon);
  return {EventSequence(std::vector<double>(times.begin(), split), start),
          EventSequence(std::vector<double>(split, stop), start + horizon)};
}

double draw_window_start(double t_max, double horizon, RngStream& rng) {
  if (!(t_max >= 2.0 * horizon)) throw std::invalid_argument("draw_window_start: t_max must be >= 2 * horizon");
  return horizon + (t_max - 2.0 * horizon) * rng.uniform_pos();
}

double validation_forecast_wasserstein(const Denoiser& model, const NoiseSchedule& sched,
                                       std::span<const EventSequence> sequences, double horizon, int n_windows,
                                       RngStream& rng) {
  if (sequences.empty() || n_windows < 1) throw std::invalid_argument("validation_forecast_wasserstein: no windows");
  double total = 0.0;
  for (int i = 0; i < n_windows; ++i) {
    auto window_rng = rng.substream(static_cast<std::uint64_t>(i));
    const auto& seq = sequences[static_cast<std::size_t>(i) % sequences.size()];
    const double start = draw_window_start(seq.t_max(), horizon, window_rng);
    const auto example = split_window(seq, start, horizon);
    const auto pred = forecast(model, sched, example.history, horizon, window_rng);
    total += forecast_wasserstein(pred.times(), example.truth.times(), {start, start + horizon});
  }
  return total / n_windows;
}

std::vector<EventSequence> draw_samples(const Denoiser& model, const NoiseSchedule& sched, int count, double t_max,
                                        RngStream& rng) {
  const NeuralReverseModel reverse(model);
  std::vector<EventSequence> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    auto sample_rng = rng.substream(static_cast<std::uint64_t>(i));
    out.push_back(rescale(sample_unconditional(reverse, sched, sample_rng), t_max));
  }
  return out;
}

Checkpoint train(std::span<const EventSequence> train_split, std::span<const EventSequence> val_split,
                 const TrainConfig& config, const TrainLogger& logger) {
  config.validate();
  if (train_split.empty()) throw std::invalid_argument("train: empty training split");
  if (val_split.size() < 2) throw std::invalid_argument("train: validation split needs at least 2 sequences");
  const double t_max = train_split.front().t_max();
  for (auto split : {train_split, val_split}) {
    for (const auto& s : split) {
      if (s.t_max() != t_max) throw std::invalid_argument("train: sequences have different t_max");
    }
  }
  if (config.conditional && !(t_max >= 2.0 * config.horizon)) {
    throw std::invalid_argument("train: horizon must be at most half of t_max");
  }

  Checkpoint ckpt;
  ckpt.train = config;
  ckpt.model = config.model_config();
  ckpt.schedule = cosine_schedule(config.n_steps, config.hpp_rate * (config.conditional ? config.horizon : t_max));
  ckpt.data_t_max = t_max;

  Denoiser model(ckpt.model, config.seed);
  ckpt.params = model.params();
  const auto& sched = ckpt.schedule;

  std::vector<EventSequence> unit_sequences;
  if (!config.conditional) {
    unit_sequences.reserve(train_split.size());
    for (const auto& s : train_split) unit_sequences.push_back(rescale(s, 1.0));
  }

  nn::ParameterSet averaged = model.params();
  std::vector<double> ema_sum(averaged.size(), 0.0);
  double ema_correction = 1.0;
  auto validate = [&]() {
    RngStream rng(config.seed, kValidationStream);
    const Denoiser evaluated(ckpt.model, averaged);
    if (config.conditional) {
      return validation_forecast_wasserstein(evaluated, sched, val_split, config.horizon, config.validation_samples,
                                             rng);
    }
    const auto samples = draw_samples(evaluated, sched, config.validation_samples, t_max, rng);
    return mmd(samples, val_split).value;
  };

  AdamState adam;
  std::vector<double> grad(model.params().size());
  std::vector<double> metrics;
  std::vector<std::size_t> order(train_split.size());
  std::uniform_int_distribution<int> step_dist(1, config.n_steps);
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_rng_root = RngStream(config.seed, kEpochStream).substream(static_cast<std::uint64_t>(epoch));
    auto shuffle_rng = epoch_rng_root;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t pos = begin; pos < end; ++pos) {
        auto item_rng = epoch_rng_root.substream(pos + 1);
        const auto index = order[pos];
        const int n = step_dist(item_rng);
        LossBreakdown lb;
        if (config.conditional) {
          const double start = draw_window_start(t_max, config.horizon, item_rng);
          const auto example = split_window(train_split[index], start, config.horizon);
          const auto history = rescale(example.history, start / config.horizon);
          const auto target = to_unit_window(example.truth, start, config.horizon);
          lb = model.loss(target, n, sched, item_rng, &history, grad);
        } else {
          lb = model.loss(unit_sequences[index], n, sched, item_rng, nullptr, grad);
        }
        if (!std::isfinite(lb.total)) {
          throw NumericalFailure("train: non-finite loss at epoch " + std::to_string(epoch));
        }
        epoch_loss += lb.total;
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (double& g : grad) g *= inv;
      adam_step(model.params().values(), grad, adam, config.learning_rate);
      // Bias-corrected average.
      ema_correction *= config.ema_decay;
      const auto current = model.params().values();
      auto avg = averaged.values();
      for (std::size_t i = 0; i < avg.size(); ++i) {
        ema_sum[i] = config.ema_decay * ema_sum[i] + (1.0 - config.ema_decay) * current[i];
        avg[i] = ema_sum[i] / (1.0 - ema_correction);
      }
    }
    epoch_loss /= static_cast<double>(order.size());

    const bool last = epoch == config.max_epochs;
    if (epoch % config.validation_interval != 0 && !(last && metrics.empty())) continue;
    const double metric = validate();
    if (!std::isfinite(metric)) throw NumericalFailure("train: non-finite validation metric");
    metrics.push_back(metric);
    MetricRecord record{epoch, epoch_loss, metric};
    ckpt.history.push_back(record);
    if (logger) logger(record);
    if (metric < best) {
      best = metric;
      ckpt.best_epoch = epoch;
      ckpt.params = averaged;
    }
    if (early_stop(metrics, config.patience)) break;
  }
  return ckpt;
}

}  // namespace addthin
