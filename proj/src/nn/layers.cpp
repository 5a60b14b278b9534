#include "addthin/nn/layers.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace addthin::nn {
namespace {

using ConstMap = Eigen::Map<const Matrix>;
using GradMap = Eigen::Map<Matrix>;

ConstMap weight_map(const ParameterSet& params, std::size_t offset, int rows, int cols) {
  return {params.data(offset), rows, cols};
}

GradMap grad_map(std::span<double> grad, std::size_t offset, int rows, int cols) {
  return {grad.data() + offset, rows, cols};
}

void fill_uniform(std::span<double> values, double bound, RngStream& rng) {
  for (auto& v : values) v = (2.0 * rng.uniform() - 1.0) * bound;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

RowVector sigmoid(const RowVector& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

Matrix activate(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::relu:
      return pre.cwiseMax(0.0);
    case Activation::silu:
      return pre.unaryExpr([](double v) { return v * sigmoid(v); });
    case Activation::tanh:
      return pre.array().tanh().matrix();
    case Activation::identity:
      return pre;
  }
  return pre;
}

Matrix activate_backward(Activation act, const Matrix& pre, const Matrix& upstream) {
  switch (act) {
    case Activation::relu:
      return upstream.cwiseProduct(pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    case Activation::silu:
      return upstream.cwiseProduct(pre.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
      }));
    case Activation::tanh:
      return upstream.cwiseProduct(pre.unaryExpr([](double v) {
        const double t = std::tanh(v);
        return 1.0 - t * t;
      }));
    case Activation::identity:
      return upstream;
  }
  return upstream;
}

Vector sinusoidal_embed(double x, int dim, double max_period) {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_embed: dim must be even and positive");
  if (!(max_period > 0.0)) throw std::invalid_argument("sinusoidal_embed: max_period must be positive");
  const int half = dim / 2;
  Vector out(dim);
  for (int k = 0; k < half; ++k) {
    const double freq = half > 1 ? std::pow(max_period, -static_cast<double>(k) / (half - 1)) : 1.0;
    out[2 * k] = std::sin(x * freq);
    out[2 * k + 1] = std::cos(x * freq);
  }
  return out;
}

Matrix sinusoidal_embed(std::span<const double> xs, int dim, double max_period) {
  if (dim <= 0 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_embed: dim must be even and positive");
  const int half = dim / 2;
  std::vector<double> freqs(half);
  for (int k = 0; k < half; ++k) {
    freqs[k] = half > 1 ? std::pow(max_period, -static_cast<double>(k) / (half - 1)) : 1.0;
  }
  Matrix out(static_cast<Eigen::Index>(xs.size()), dim);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int k = 0; k < half; ++k) {
      out(i, 2 * k) = std::sin(xs[i] * freqs[k]);
      out(i, 2 * k + 1) = std::cos(xs[i] * freqs[k]);
    }
  }
  return out;
}

Linear Linear::create(ParameterSet& params, const std::string& name, int in, int out, Init init, RngStream& rng) {
  Linear l;
  l.in = in;
  l.out = out;
  l.weight = params.add(name + ".weight", {static_cast<std::size_t>(in), static_cast<std::size_t>(out)});
  l.bias = params.add(name + ".bias", {static_cast<std::size_t>(out)});
  auto w = params.values(name + ".weight");
  auto b = params.values(name + ".bias");
  switch (init) {
    case Init::fan_in_uniform: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      fill_uniform(w, bound, rng);
      fill_uniform(b, bound, rng);
      break;
    }
    case Init::identity:
      for (int i = 0; i < std::min(in, out); ++i) w[static_cast<std::size_t>(i) * out + i] = 1.0;
      break;
    case Init::zeros:
      break;
  }
  return l;
}

Matrix Linear::forward(const ParameterSet& params, const Matrix& x) const {
  const auto w = weight_map(params, weight, in, out);
  const auto b = weight_map(params, bias, 1, out);
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

Matrix Linear::backward(const ParameterSet& params, const Matrix& x, const Matrix& dy, std::span<double> grad) const {
  grad_map(grad, weight, in, out).noalias() += x.transpose() * dy;
  grad_map(grad, bias, 1, out) += dy.colwise().sum();
  return dy * weight_map(params, weight, in, out).transpose();
}

Mlp Mlp::create(ParameterSet& params, const std::string& name, int in, int hidden, int out, Activation act,
                Init last_init, RngStream& rng) {
  Mlp m;
  m.first = Linear::create(params, name + ".0", in, hidden, Init::fan_in_uniform, rng);
  m.second = Linear::create(params, name + ".1", hidden, out, last_init, rng);
  m.act = act;
  return m;
}

Matrix Mlp::forward(const ParameterSet& params, const Matrix& x, Cache* cache) const {
  Matrix pre = first.forward(params, x);
  Matrix hidden = activate(act, pre);
  Matrix y = second.forward(params, hidden);
  if (cache != nullptr) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return y;
}

Matrix Mlp::backward(const ParameterSet& params, const Cache& cache, const Matrix& dy, std::span<double> grad) const {
  const Matrix dhidden = second.backward(params, cache.hidden, dy, grad);
  const Matrix dpre = activate_backward(act, cache.pre, dhidden);
  return first.backward(params, cache.x, dpre, grad);
}

ConvEncoder ConvEncoder::create(ParameterSet& params, const std::string& name, int dim, int n_layers, Activation act,
                                Init init, RngStream& rng) {
  ConvEncoder enc;
  enc.dim = dim;
  enc.act = act;
  for (int l = 0; l < n_layers; ++l) {
    const std::string prefix = name + "." + std::to_string(l);
    Layer layer;
    layer.dilation = 1 << l;
    layer.weight = params.add(prefix + ".weight", {static_cast<std::size_t>(3 * dim), static_cast<std::size_t>(dim)});
    layer.bias = params.add(prefix + ".bias", {static_cast<std::size_t>(dim)});
    if (init == Init::fan_in_uniform) {
      const double bound = 1.0 / std::sqrt(3.0 * dim);
      fill_uniform(params.values(prefix + ".weight"), bound, rng);
      fill_uniform(params.values(prefix + ".bias"), bound, rng);
    }
    enc.layers.push_back(layer);
  }
  return enc;
}

Matrix ConvEncoder::forward(const ParameterSet& params, const Matrix& x, Cache* cache) const {
  const Eigen::Index k = x.rows();
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->gathered.clear();
  }
  Matrix cur = x;
  for (const auto& layer : layers) {
    const Matrix a = activate(act, cur);
    Matrix gathered(k, 3 * dim);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (int tap = 0; tap < 3; ++tap) {
        const Eigen::Index src = ((i + (tap - 1) * layer.dilation) % k + k) % k;
        gathered.block(i, tap * dim, 1, dim) = a.row(src);
      }
    }
    Matrix z = gathered * weight_map(params, layer.weight, 3 * dim, dim);
    z.rowwise() += weight_map(params, layer.bias, 1, dim).row(0);
    if (cache != nullptr) {
      cache->inputs.push_back(cur);
      cache->gathered.push_back(std::move(gathered));
    }
    cur += z;
  }
  return cur;
}

Matrix ConvEncoder::backward(const ParameterSet& params, const Cache& cache, const Matrix& dy,
                             std::span<double> grad) const {
  Matrix dcur = dy;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const auto& layer = layers[l];
    const Matrix& gathered = cache.gathered[l];
    const Eigen::Index k = gathered.rows();
    grad_map(grad, layer.weight, 3 * dim, dim).noalias() += gathered.transpose() * dcur;
    grad_map(grad, layer.bias, 1, dim) += dcur.colwise().sum();
    const Matrix dgathered = dcur * weight_map(params, layer.weight, 3 * dim, dim).transpose();
    Matrix da = Matrix::Zero(k, dim);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (int tap = 0; tap < 3; ++tap) {
        const Eigen::Index src = ((i + (tap - 1) * layer.dilation) % k + k) % k;
        da.row(src) += dgathered.block(i, tap * dim, 1, dim);
      }
    }
    dcur += activate_backward(act, cache.inputs[l], da);
  }
  return dcur;
}

Gru Gru::create(ParameterSet& params, const std::string& name, int in, int hidden, RngStream& rng) {
  Gru g;
  g.in = in;
  g.hidden = hidden;
  const auto h3 = static_cast<std::size_t>(3 * hidden);
  g.w_ih = params.add(name + ".w_ih", {static_cast<std::size_t>(in), h3});
  g.w_hh = params.add(name + ".w_hh", {static_cast<std::size_t>(hidden), h3});
  g.b_ih = params.add(name + ".b_ih", {h3});
  g.b_hh = params.add(name + ".b_hh", {h3});
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (const char* part : {".w_ih", ".w_hh", ".b_ih", ".b_hh"}) {
    fill_uniform(params.values(name + part), bound, rng);
  }
  return g;
}

RowVector Gru::forward(const ParameterSet& params, const Matrix& x, Cache* cache) const {
  const int h = hidden;
  RowVector state = RowVector::Zero(h);
  if (cache != nullptr) {
    cache->x = x;
    cache->h.assign(1, state);
    cache->r.clear();
    cache->z.clear();
    cache->n.clear();
    cache->hn.clear();
  }
  if (x.rows() == 0) return state;
  const auto w_hh_map = weight_map(params, w_hh, h, 3 * h);
  const auto b_hh_map = weight_map(params, b_hh, 1, 3 * h);
  Matrix gi = x * weight_map(params, w_ih, in, 3 * h);
  gi.rowwise() += weight_map(params, b_ih, 1, 3 * h).row(0);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const RowVector gh = state * w_hh_map + b_hh_map.row(0);
    const RowVector r = sigmoid(RowVector(gi.row(t).segment(0, h) + gh.segment(0, h)));
    const RowVector z = sigmoid(RowVector(gi.row(t).segment(h, h) + gh.segment(h, h)));
    const RowVector hn = gh.segment(2 * h, h);
    const RowVector n = (gi.row(t).segment(2 * h, h) + r.cwiseProduct(hn)).array().tanh().matrix();
    state = (RowVector::Ones(h) - z).cwiseProduct(n) + z.cwiseProduct(state);
    if (cache != nullptr) {
      cache->r.push_back(r);
      cache->z.push_back(z);
      cache->n.push_back(n);
      cache->hn.push_back(hn);
      cache->h.push_back(state);
    }
  }
  return state;
}

Matrix Gru::backward(const ParameterSet& params, const Cache& cache, const RowVector& dh_final,
                     std::span<double> grad) const {
  const int h = hidden;
  const Eigen::Index steps = cache.x.rows();
  Matrix dx = Matrix::Zero(steps, in);
  if (steps == 0) return dx;
  const auto w_ih_map = weight_map(params, w_ih, in, 3 * h);
  const auto w_hh_map = weight_map(params, w_hh, h, 3 * h);
  auto g_w_ih = grad_map(grad, w_ih, in, 3 * h);
  auto g_w_hh = grad_map(grad, w_hh, h, 3 * h);
  auto g_b_ih = grad_map(grad, b_ih, 1, 3 * h);
  auto g_b_hh = grad_map(grad, b_hh, 1, 3 * h);
  Matrix dgi_all(steps, 3 * h);
  RowVector dh = dh_final;
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto& r = cache.r[t];
    const auto& z = cache.z[t];
    const auto& n = cache.n[t];
    const auto& hn = cache.hn[t];
    const auto& h_prev = cache.h[t];
    const RowVector dn = dh.cwiseProduct(RowVector::Ones(h) - z);
    const RowVector dz = dh.cwiseProduct(h_prev - n);
    RowVector dh_prev = dh.cwiseProduct(z);
    const RowVector da_n = dn.cwiseProduct((RowVector::Ones(h) - n.cwiseProduct(n)));
    const RowVector da_r = da_n.cwiseProduct(hn).cwiseProduct(r.cwiseProduct(RowVector::Ones(h) - r));
    const RowVector da_z = dz.cwiseProduct(z.cwiseProduct(RowVector::Ones(h) - z));
    RowVector dgh(3 * h);
    dgh << da_r, da_z, da_n.cwiseProduct(r);
    dgi_all.row(t) << da_r, da_z, da_n;
    g_w_hh.noalias() += h_prev.transpose() * dgh;
    g_b_hh += dgh;
    dh_prev.noalias() += dgh * w_hh_map.transpose();
    dh = dh_prev;
  }
  g_w_ih.noalias() += cache.x.transpose() * dgi_all;
  g_b_ih += dgi_all.colwise().sum();
  dx.noalias() = dgi_all * w_ih_map.transpose();
  return dx;
}

Matrix conv_encoder_forward(const Matrix& event_embeddings, const ConvEncoder& encoder, const ParameterSet& params) {
  return encoder.forward(params, event_embeddings);
}

RowVector gru_encode(const Matrix& sequence_embeddings, const Gru& gru, const ParameterSet& params) {
  return gru.forward(params, sequence_embeddings);
}

Matrix mlp_forward(const Matrix& x, const Mlp& mlp, const ParameterSet& params) { return mlp.forward(params, x); }

}  // namespace addthin::nn
