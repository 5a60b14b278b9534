#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "addthin/nn/parameters.hpp"
#include "addthin/nn/tensor.hpp"
#include "addthin/rng.hpp"

namespace addthin::nn {

// Fixed building blocks with hand-written reverse passes. Every layer holds
// only offsets into a ParameterSet; gradients are accumulated into a flat
// span with the ParameterSet layout.

enum class Activation { relu, silu, tanh, identity };

Matrix activate(Activation act, const Matrix& pre);
/// d act(pre) / d pre, elementwise, times `upstream`.
Matrix activate_backward(Activation act, const Matrix& pre, const Matrix& upstream);

/// Interleaved [sin(x f_0), cos(x f_0), sin(x f_1), ...] with frequencies
/// geometrically spaced from 1 down to 1/max_period.
Vector sinusoidal_embed(double x, int dim, double max_period);
/// One embedding row per entry of `xs`.
Matrix sinusoidal_embed(std::span<const double> xs, int dim, double max_period);

enum class Init { fan_in_uniform, zeros, identity };

/// y = x W + b, W of shape (in, out).
struct Linear {
  std::size_t weight = 0;
  std::size_t bias = 0;
  int in = 0;
  int out = 0;

  static Linear create(ParameterSet& params, const std::string& name, int in, int out, Init init,
                       RngStream& rng);

  [[nodiscard]] Matrix forward(const ParameterSet& params, const Matrix& x) const;
  /// Accumulates dW, db into `grad`; returns dL/dx.
  Matrix backward(const ParameterSet& params, const Matrix& x, const Matrix& dy, std::span<double> grad) const;
};

/// Two affine maps with an activation in between.
struct Mlp {
  Linear first;
  Linear second;
  Activation act = Activation::relu;

  struct Cache {
    Matrix x;
    Matrix pre;
    Matrix hidden;
  };

  static Mlp create(ParameterSet& params, const std::string& name, int in, int hidden, int out,
                    Activation act, Init last_init, RngStream& rng);

  Matrix forward(const ParameterSet& params, const Matrix& x, Cache* cache = nullptr) const;
  Matrix backward(const ParameterSet& params, const Cache& cache, const Matrix& dy, std::span<double> grad) const;
};

/// Residual stack of dilated 1-D convolutions with circular padding:
///   x_{l+1} = x_l + conv_l(act(x_l)),  kernel 3, dilation 2^l.
struct ConvEncoder {
  struct Layer {
    std::size_t weight = 0;  // (3 * dim, dim): taps for offsets -dil, 0, +dil
    std::size_t bias = 0;
    int dilation = 1;
  };
  std::vector<Layer> layers;
  int dim = 0;
  Activation act = Activation::relu;

  struct Cache {
    std::vector<Matrix> inputs;  // x_l
    std::vector<Matrix> gathered;  // [act(x_l) shifted by each tap]
  };

  static ConvEncoder create(ParameterSet& params, const std::string& name, int dim, int n_layers,
                            Activation act, Init init, RngStream& rng);

  [[nodiscard]] Matrix forward(const ParameterSet& params, const Matrix& x, Cache* cache = nullptr) const;
  Matrix backward(const ParameterSet& params, const Cache& cache, const Matrix& dy, std::span<double> grad) const;
};

/// Gated recurrent unit (reset/update/candidate gate order r, z, n):
///   r = sig(x W_ir + b_ir + h W_hr + b_hr)
///   z = sig(x W_iz + b_iz + h W_hz + b_hz)
///   n = tanh(x W_in + b_in + r * (h W_hn + b_hn))
///   h' = (1 - z) * n + z * h
struct Gru {
  std::size_t w_ih = 0;  // (in, 3 * hidden)
  std::size_t w_hh = 0;  // (hidden, 3 * hidden)
  std::size_t b_ih = 0;
  std::size_t b_hh = 0;
  int in = 0;
  int hidden = 0;

  struct Cache {
    Matrix x;
    std::vector<RowVector> h;  // h_0 .. h_T
    std::vector<RowVector> r, z, n, hn;
  };

  static Gru create(ParameterSet& params, const std::string& name, int in, int hidden, RngStream& rng);

  /// Final hidden state after consuming rows of `x` in order; zero for no rows.
  [[nodiscard]] RowVector forward(const ParameterSet& params, const Matrix& x, Cache* cache = nullptr) const;
  /// Returns dL/dx given dL/dh_T.
  Matrix backward(const ParameterSet& params, const Cache& cache, const RowVector& dh, std::span<double> grad) const;
};

// Free-function forms of the forward passes.
Matrix conv_encoder_forward(const Matrix& event_embeddings, const ConvEncoder& encoder, const ParameterSet& params);
RowVector gru_encode(const Matrix& sequence_embeddings, const Gru& gru, const ParameterSet& params);
Matrix mlp_forward(const Matrix& x, const Mlp& mlp, const ParameterSet& params);

}  // namespace addthin::nn
