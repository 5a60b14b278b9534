#include "addthin/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "addthin/posterior.hpp"

namespace addthin {

using nn::Matrix;
using nn::RowVector;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double log_softplus(double x) {
  if (x < -30.0) return x;  // softplus(x) = e^x (1 + O(e^x))
  return std::log(softplus(x));
}

// sigmoid(x) / softplus(x), the derivative of log softplus.
double dlog_softplus(double x) {
  if (x < -30.0) return 1.0;
  return sigmoid(x) / softplus(x);
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

struct Denoiser::Cache {
  std::size_t k = 0;
  Matrix embedded;
  Matrix events;
  nn::ConvEncoder::Cache conv;
  Matrix context;
  RowVector global;
  nn::Mlp::Cache step;
  RowVector step_embed;
  nn::Gru::Cache gru;
  bool has_history = false;
  RowVector history_embed;
  RowVector cond;
  nn::Mlp::Cache cls;
  Matrix logits;
  nn::Mlp::Cache head_w;
  nn::Mlp::Cache head_l;
  nn::Mlp::Cache head_s;
  RowVector raw_w;
  RowVector raw_l;
  RowVector raw_s;
};

Denoiser::Layout Denoiser::build(const ModelConfig& config, nn::ParameterSet& params, RngStream& rng) {
  if (config.hidden_dim <= 0 || config.hidden_dim % 2 != 0) {
    throw std::invalid_argument("ModelConfig: hidden_dim must be even and positive");
  }
  if (config.n_components <= 0) throw std::invalid_argument("ModelConfig: n_components must be positive");
  if (config.n_steps <= 0) throw std::invalid_argument("ModelConfig: n_steps must be positive");
  const int d = config.hidden_dim;
  const int h = config.n_components;
  Layout l;
  l.event_proj = nn::Linear::create(params, "event_proj", 2 * d, d, nn::Init::fan_in_uniform, rng);
  l.conv = nn::ConvEncoder::create(params, "conv", d, 3, nn::Activation::relu, nn::Init::zeros, rng);
  l.empty_context = params.add("empty_context", {static_cast<std::size_t>(d)});
  l.step_mlp = nn::Mlp::create(params, "step_mlp", d, d, d, nn::Activation::relu, nn::Init::fan_in_uniform, rng);
  l.classifier = nn::Mlp::create(params, "classifier", 3 * d, d, 1, nn::Activation::relu, nn::Init::zeros, rng);
  l.head_weight = nn::Mlp::create(params, "head_weight", 2 * d, d, h, nn::Activation::relu, nn::Init::fan_in_uniform, rng);
  // Start with total mixture weight near 1, i.e. intensity mass near K.
  for (double& b : params.values("head_weight.1.bias")) b = std::log(std::expm1(1.0 / h));
  l.head_location =
      nn::Mlp::create(params, "head_location", 2 * d, d, h, nn::Activation::relu, nn::Init::fan_in_uniform, rng);
  l.head_scale = nn::Mlp::create(params, "head_scale", 2 * d, d, h, nn::Activation::relu, nn::Init::fan_in_uniform, rng);
  if (config.conditional) l.gru = nn::Gru::create(params, "history_gru", 2 * d, d, rng);
  return l;
}

Denoiser::Denoiser(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  RngStream rng(seed, 0x1a17);
  layout_ = build(config_, params_, rng);
}

Denoiser::Denoiser(const ModelConfig& config, const nn::ParameterSet& params) : config_(config) {
  RngStream rng(0, 0);
  layout_ = build(config_, params_, rng);
  const auto& mine = params_.entries();
  const auto& theirs = params.entries();
  if (mine.size() != theirs.size()) {
    throw std::invalid_argument("Denoiser: parameter count mismatch (" + std::to_string(theirs.size()) + " vs " +
                                std::to_string(mine.size()) + ")");
  }
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].name != theirs[i].name || mine[i].shape != theirs[i].shape) {
      throw std::invalid_argument("Denoiser: parameter layout mismatch at " + theirs[i].name);
    }
  }
  std::copy(params.values().begin(), params.values().end(), params_.values().begin());
}

double Denoiser::count_scale(std::size_t n_events) { return static_cast<double>(std::max<std::size_t>(n_events, 1)); }

Matrix Denoiser::history_features(const EventSequence& history) const {
  const std::size_t k = history.size();
  std::vector<double> gaps(k);
  std::vector<double> lags(k);
  double prev = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    gaps[i] = (history[i] - prev) * config_.embed_scale;
    lags[i] = (history.t_max() - history[i]) * config_.embed_scale;
    prev = history[i];
  }
  const int d = config_.hidden_dim;
  Matrix features(static_cast<Eigen::Index>(k), 2 * d);
  features.leftCols(d) = nn::sinusoidal_embed(gaps, d, config_.max_period);
  features.rightCols(d) = nn::sinusoidal_embed(lags, d, config_.max_period);
  return features;
}

RowVector Denoiser::encode_history(const EventSequence* history) const {
  if (!config_.conditional || history == nullptr) return RowVector::Zero(config_.hidden_dim);
  return layout_.gru->forward(params_, history_features(*history));
}

void Denoiser::forward(const EventSequence& tn, int n, const EventSequence* history, const RowVector* history_embed,
                       Cache& c, bool keep) const {
  const int d = config_.hidden_dim;
  const std::size_t k = tn.size();
  c.k = k;

  if (k > 0) {
    std::vector<double> times(k);
    std::vector<double> gaps(k);
    double prev = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      times[i] = tn[i] * config_.embed_scale;
      gaps[i] = (tn[i] - prev) * config_.embed_scale;
      prev = tn[i];
    }
    c.embedded.resize(static_cast<Eigen::Index>(k), 2 * d);
    c.embedded.leftCols(d) = nn::sinusoidal_embed(times, d, config_.max_period);
    c.embedded.rightCols(d) = nn::sinusoidal_embed(gaps, d, config_.max_period);
    c.events = layout_.event_proj.forward(params_, c.embedded);
    c.context = layout_.conv.forward(params_, c.events, keep ? &c.conv : nullptr);
    c.global = c.context.colwise().mean();
  } else {
    c.embedded.resize(0, 2 * d);
    c.events.resize(0, d);
    c.context.resize(0, d);
    c.global = Eigen::Map<const RowVector>(params_.data(layout_.empty_context), d);
  }

  const double step_pos = static_cast<double>(n) / config_.n_steps * config_.embed_scale;
  const Matrix step_in = nn::sinusoidal_embed(step_pos, d, config_.max_period).transpose();
  c.step_embed = layout_.step_mlp.forward(params_, step_in, keep ? &c.step : nullptr);

  c.has_history = false;
  if (history_embed != nullptr) {
    c.history_embed = *history_embed;
  } else if (config_.conditional && history != nullptr) {
    c.has_history = true;
    c.history_embed = layout_.gru->forward(params_, history_features(*history), keep ? &c.gru : nullptr);
  } else {
    c.history_embed = RowVector::Zero(d);
  }
  c.cond = c.step_embed + c.history_embed;

  if (k > 0) {
    Matrix cls_in(static_cast<Eigen::Index>(k), 3 * d);
    cls_in.leftCols(d) = c.events;
    cls_in.middleCols(d, d) = c.context;
    cls_in.rightCols(d) = c.cond.replicate(static_cast<Eigen::Index>(k), 1);
    c.logits = layout_.classifier.forward(params_, cls_in, keep ? &c.cls : nullptr);
  } else {
    c.logits.resize(0, 1);
  }

  Matrix head_in(1, 2 * d);
  head_in.leftCols(d) = c.cond;
  head_in.rightCols(d) = c.global;
  c.raw_w = layout_.head_weight.forward(params_, head_in, keep ? &c.head_w : nullptr);
  c.raw_l = layout_.head_location.forward(params_, head_in, keep ? &c.head_l : nullptr);
  c.raw_s = layout_.head_scale.forward(params_, head_in, keep ? &c.head_s : nullptr);
}

EventEncoding Denoiser::encode(const EventSequence& tn, int n, const EventSequence* history) const {
  Cache c;
  forward(tn, n, history, nullptr, c, false);
  return {c.events, c.context, c.global, c.step_embed, c.history_embed};
}

EventEncoding Denoiser::encode(const EventSequence& tn, int n, const RowVector& history_embed) const {
  Cache c;
  forward(tn, n, nullptr, &history_embed, c, false);
  return {c.events, c.context, c.global, c.step_embed, c.history_embed};
}

std::vector<double> Denoiser::classify_keep(const EventEncoding& enc) const {
  const int d = config_.hidden_dim;
  const auto k = enc.events.rows();
  std::vector<double> probs(static_cast<std::size_t>(k));
  if (k == 0) return probs;
  Matrix cls_in(k, 3 * d);
  cls_in.leftCols(d) = enc.events;
  cls_in.middleCols(d, d) = enc.context;
  cls_in.rightCols(d) = (enc.step_embed + enc.history_embed).replicate(k, 1);
  const Matrix logits = layout_.classifier.forward(params_, cls_in);
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  for (Eigen::Index i = 0; i < k; ++i) probs[i] = std::clamp(sigmoid(logits(i, 0)), lo, hi);
  return probs;
}

MixtureIntensityParams Denoiser::mixture_params(const EventEncoding& enc, double count) const {
  const int d = config_.hidden_dim;
  Matrix head_in(1, 2 * d);
  head_in.leftCols(d) = enc.step_embed + enc.history_embed;
  head_in.rightCols(d) = enc.global;
  const Matrix raw_w = layout_.head_weight.forward(params_, head_in);
  const Matrix raw_l = layout_.head_location.forward(params_, head_in);
  const Matrix raw_s = layout_.head_scale.forward(params_, head_in);
  const int h = config_.n_components;
  MixtureIntensityParams p;
  p.count_scale = count;
  p.weights.resize(h);
  p.locations.resize(h);
  p.scales.resize(h);
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  for (int j = 0; j < h; ++j) {
    p.weights[j] = std::max(softplus(raw_w(0, j)), lo);
    p.locations[j] = std::clamp(sigmoid(raw_l(0, j)), lo, hi);
    p.scales[j] = config_.sigma_floor + (1.0 - config_.sigma_floor) * std::exp(-std::abs(raw_s(0, j)));
  }
  return p;
}

LossBreakdown Denoiser::loss(const EventSequence& t0, int n, const NoiseSchedule& sched, RngStream& rng,
                             const EventSequence* history, std::span<double> grad) const {
  const NoisySequence tn = corrupt(t0, n, sched, rng);
  return loss_given(t0, tn, n, history, grad);
}

LossBreakdown Denoiser::loss_given(const EventSequence& t0, const NoisySequence& noisy, int n,
                                   const EventSequence* history, std::span<double> grad) const {
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != params_.size()) throw std::invalid_argument("Denoiser::loss: gradient size mismatch");
  const int d = config_.hidden_dim;
  const int h = config_.n_components;
  const EventSequence& tn = noisy.events;
  Cache c;
  forward(tn, n, history, nullptr, c, want_grad);
  const std::size_t k = c.k;

  LossBreakdown out;

  // Keep classifier: BCE with logits against provenance labels.
  Matrix dlogits(static_cast<Eigen::Index>(k), 1);
  for (std::size_t i = 0; i < k; ++i) {
    const double logit = c.logits(static_cast<Eigen::Index>(i), 0);
    const double y = noisy.from_original[i] ? 1.0 : 0.0;
    out.bce += softplus(logit) - y * logit;
    dlogits(static_cast<Eigen::Index>(i), 0) = sigmoid(logit) - y;
  }

  // Mixture NLL of the clean events missing from t^(n).
  const double scale = count_scale(k);
  std::vector<double> w(h), log_w(h), mu(h), sigma(h), log_norm(h), dlogz_dmu(h), dlogz_dsigma(h);
  for (int j = 0; j < h; ++j) {
    w[j] = softplus(c.raw_w(j));
    log_w[j] = log_softplus(c.raw_w(j));
    mu[j] = sigmoid(c.raw_l(j));
    sigma[j] = config_.sigma_floor + (1.0 - config_.sigma_floor) * std::exp(-std::abs(c.raw_s(j)));
    const double a = -mu[j] / sigma[j];
    const double b = (1.0 - mu[j]) / sigma[j];
    const double mass = truncated_normal_mass(mu[j], sigma[j]);
    log_norm[j] = std::log(std::sqrt(2.0 * std::numbers::pi) * sigma[j] * mass);
    if (mass > kMinComponentMass) {
      dlogz_dmu[j] = (std_normal_pdf(a) - std_normal_pdf(b)) / (sigma[j] * mass);
      dlogz_dsigma[j] = (a * std_normal_pdf(a) - b * std_normal_pdf(b)) / (sigma[j] * mass);
    } else {
      dlogz_dmu[j] = 0.0;
      dlogz_dsigma[j] = 0.0;
    }
  }

  std::vector<double> d_log_w(h, 0.0), d_mu(h, 0.0), d_sigma(h, 0.0);
  const auto missing = decompose(t0, tn, n).missing;
  std::vector<double> log_terms(h);
  for (double t : missing.times()) {
    double max_term = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < h; ++j) {
      const double u = (t - mu[j]) / sigma[j];
      log_terms[j] = log_w[j] - 0.5 * u * u - log_norm[j];
      max_term = std::max(max_term, log_terms[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < h; ++j) sum += std::exp(log_terms[j] - max_term);
    const double log_lambda = std::log(scale) + max_term + std::log(sum);
    out.nll -= log_lambda;
    if (want_grad) {
      for (int j = 0; j < h; ++j) {
        const double resp = std::exp(log_terms[j] - max_term) / sum;
        const double u = (t - mu[j]) / sigma[j];
        d_log_w[j] -= resp;
        d_mu[j] -= resp * (u / sigma[j] - dlogz_dmu[j]);
        d_sigma[j] -= resp * ((u * u - 1.0) / sigma[j] - dlogz_dsigma[j]);
      }
    }
  }
  double weight_sum = 0.0;
  for (int j = 0; j < h; ++j) weight_sum += w[j];
  out.nll += scale * weight_sum;
  out.total = out.nll + out.bce;
  if (!want_grad) return out;

  // Reverse pass.
  Matrix draw_w(1, h), draw_l(1, h), draw_s(1, h);
  for (int j = 0; j < h; ++j) {
    const double o = c.raw_w(j);
    draw_w(0, j) = d_log_w[j] * dlog_softplus(o) + scale * sigmoid(o);
    draw_l(0, j) = d_mu[j] * mu[j] * (1.0 - mu[j]);
    const double os = c.raw_s(j);
    const double sign = os > 0.0 ? 1.0 : (os < 0.0 ? -1.0 : 0.0);
    draw_s(0, j) = d_sigma[j] * (-(1.0 - config_.sigma_floor) * std::exp(-std::abs(os)) * sign);
  }
  Matrix dhead_in = layout_.head_weight.backward(params_, c.head_w, draw_w, grad);
  dhead_in += layout_.head_location.backward(params_, c.head_l, draw_l, grad);
  dhead_in += layout_.head_scale.backward(params_, c.head_s, draw_s, grad);
  RowVector dcond = dhead_in.leftCols(d);
  const RowVector dglobal = dhead_in.rightCols(d);

  if (k > 0) {
    const Matrix dcls_in = layout_.classifier.backward(params_, c.cls, dlogits, grad);
    Matrix devents = dcls_in.leftCols(d);
    Matrix dcontext = dcls_in.middleCols(d, d);
    dcond += dcls_in.rightCols(d).colwise().sum();
    dcontext.rowwise() += dglobal / static_cast<double>(k);
    devents += layout_.conv.backward(params_, c.conv, dcontext, grad);
    layout_.event_proj.backward(params_, c.embedded, devents, grad);
  } else {
    Eigen::Map<RowVector>(grad.data() + layout_.empty_context, d) += dglobal;
  }

  layout_.step_mlp.backward(params_, c.step, dcond, grad);
  if (c.has_history) layout_.gru->backward(params_, c.gru, dcond, grad);
  return out;
}

}  // namespace addthin
