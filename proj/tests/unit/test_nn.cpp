#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "addthin/binary_io.hpp"
#include "addthin/errors.hpp"
#include "addthin/nn/grad_check.hpp"
#include "addthin/nn/layers.hpp"
#include "addthin/nn/parameters.hpp"

using namespace addthin;
using namespace addthin::nn;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * rng.uniform() - 1.0;
  return m;
}

void randomize(ParameterSet& params, RngStream& rng, double scale = 0.5) {
  for (auto& v : params.values()) v = scale * (2.0 * rng.uniform() - 1.0);
}

// Loss sum(y .* r) for a fixed random projection r.
double project(const Matrix& y, const Matrix& r) { return (y.array() * r.array()).sum(); }

}  // namespace

TEST_CASE("sinusoidal embedding") {
  const auto zero = sinusoidal_embed(0.0, 8, 10000.0);
  for (int k = 0; k < 4; ++k) {
    CHECK(zero[2 * k] == 0.0);
    CHECK(zero[2 * k + 1] == 1.0);
  }
  CHECK_THROWS_AS(sinusoidal_embed(0.5, 7, 10000.0), std::invalid_argument);

  const double period = 2.0 * std::numbers::pi * 100.0;
  const auto a = sinusoidal_embed(3.0, 8, 100.0);
  const auto b = sinusoidal_embed(3.0 + period, 8, 100.0);
  CHECK(a[6] == doctest::Approx(b[6]).epsilon(1e-9));
  CHECK(a[7] == doctest::Approx(b[7]).epsilon(1e-9));

  const auto u = sinusoidal_embed(0.3, 16, 10000.0);
  const auto v = sinusoidal_embed(0.7, 16, 10000.0);
  CHECK(u.dot(v) / (u.norm() * v.norm()) < 1.0 - 1e-6);

  const std::vector<double> xs{0.1, 0.9};
  const auto batch = sinusoidal_embed(std::span<const double>(xs), 16, 10000.0);
  CHECK((batch.row(0).transpose() - sinusoidal_embed(0.1, 16, 10000.0)).norm() < 1e-15);
}

TEST_CASE("conv encoder") {
  ParameterSet params;
  RngStream rng(1, 0);
  const auto conv = ConvEncoder::create(params, "conv", 4, 3, Activation::relu, Init::zeros, rng);
  CHECK(conv.layers.size() == 3);
  CHECK(conv.layers[2].dilation == 4);
  const auto x = random_matrix(5, 4, rng);
  CHECK(conv_encoder_forward(x, conv, params) == x);

  randomize(params, rng);
  const auto single = random_matrix(1, 4, rng);
  const auto y = conv_encoder_forward(single, conv, params);
  CHECK(y.rows() == 1);
  CHECK(y.allFinite());

  const auto r = random_matrix(6, 4, rng);
  const auto input = random_matrix(6, 4, rng);
  Objective op = [&](const ParameterSet& p, std::span<double> grad) {
    ConvEncoder::Cache cache;
    const auto out = conv.forward(p, input, &cache);
    if (!grad.empty()) conv.backward(p, cache, r, grad);
    return project(out, r);
  };
  RngStream check_rng(1, 1);
  const auto res = grad_check(op, params, 1e-6, check_rng, 200);
  CHECK(res.checked >= 100);
  CHECK(res.max_relative_error < 1e-4);
}

TEST_CASE("gru") {
  ParameterSet params;
  RngStream rng(2, 0);
  const auto gru = Gru::create(params, "gru", 3, 4, rng);
  const Matrix empty(0, 3);
  CHECK(gru_encode(empty, gru, params).isZero());

  ParameterSet zero_params = params;
  for (auto& v : zero_params.values()) v = 0.0;
  CHECK(gru_encode(random_matrix(1, 3, rng), gru, zero_params).isZero());

  const auto input = random_matrix(5, 3, rng);
  Matrix r = random_matrix(1, 4, rng);
  Objective op = [&](const ParameterSet& p, std::span<double> grad) {
    Gru::Cache cache;
    const RowVector h = gru.forward(p, input, &cache);
    if (!grad.empty()) gru.backward(p, cache, r.row(0), grad);
    return h.dot(r.row(0));
  };
  RngStream check_rng(2, 1);
  const auto res = grad_check(op, params, 1e-6, check_rng, 200);
  CHECK(res.checked >= 100);
  CHECK(res.max_relative_error < 1e-4);
}

TEST_CASE("mlp and linear") {
  RngStream rng(3, 0);
  {
    ParameterSet params;
    const auto mlp = Mlp::create(params, "mlp", 3, 5, 2, Activation::relu, Init::zeros, rng);
    for (auto& v : params.values()) v = 0.0;
    CHECK(mlp_forward(random_matrix(4, 3, rng), mlp, params).isZero());
  }
  {
    ParameterSet params;
    const auto lin = Linear::create(params, "id", 4, 4, Init::identity, rng);
    const auto x = random_matrix(3, 4, rng);
    CHECK(lin.forward(params, x) == x);
  }
  {
    ParameterSet params;
    const auto lin = Linear::create(params, "lin", 6, 5, Init::fan_in_uniform, rng);
    const auto x = random_matrix(7, 6, rng);
    const auto r = random_matrix(7, 5, rng);
    Objective op = [&](const ParameterSet& p, std::span<double> grad) {
      if (!grad.empty()) lin.backward(p, x, r, grad);
      return project(lin.forward(p, x), r);
    };
    RngStream check_rng(3, 1);
    CHECK(grad_check(op, params, 1e-6, check_rng, 100).max_relative_error < 1e-6);
    CHECK_THROWS_AS(grad_check(op, params, 0.0, check_rng), std::invalid_argument);
  }
  for (auto act : {Activation::silu, Activation::tanh, Activation::relu}) {
    ParameterSet params;
    const auto mlp = Mlp::create(params, "mlp", 4, 12, 3, act, Init::fan_in_uniform, rng);
    const auto x = random_matrix(6, 4, rng);
    const auto r = random_matrix(6, 3, rng);
    Objective op = [&](const ParameterSet& p, std::span<double> grad) {
      Mlp::Cache cache;
      const auto y = mlp.forward(p, x, &cache);
      if (!grad.empty()) mlp.backward(p, cache, r, grad);
      return project(y, r);
    };
    RngStream check_rng(3, 2);
    CHECK(grad_check(op, params, 1e-6, check_rng, 100).max_relative_error < 1e-4);
  }
}

TEST_CASE("grad check kink refinement") {
  // f(x) = 3x + 2|x - 0.4e-4| at x = 0, so the step 1e-4 straddles the kink; true slope is 3 - 2 = 1.
  ParameterSet params;
  params.add("x", {1});
  Objective op = [](const ParameterSet& p, std::span<double> grad) {
    const double x = p.values()[0];
    if (!grad.empty()) grad[0] = 3.0 + (x > 0.4e-4 ? 2.0 : -2.0);
    return 3.0 * x + 2.0 * std::abs(x - 0.4e-4);
  };
  GradCheckOptions options;
  options.epsilon = 1e-4;
  RngStream rng(4, 0);
  const auto plain = grad_check(op, params, rng, options);
  CHECK(plain.max_relative_error > 0.1);
  CHECK(plain.refined == 0);
  options.max_halvings = 4;
  const auto refined = grad_check(op, params, rng, options);
  CHECK(refined.max_relative_error < 1e-9);
  CHECK(refined.refined == 1);
  CHECK(refined.worst_numeric == doctest::Approx(1.0));
  options.max_halvings = -1;
  CHECK_THROWS_AS(grad_check(op, params, rng, options), std::invalid_argument);
}

TEST_CASE("parameter set serialization") {
  ParameterSet params;
  RngStream rng(4, 0);
  params.add("a", {2, 3});
  params.add("b", {4});
  randomize(params, rng, 10.0);
  params.values("b")[1] = -0.0;
  std::stringstream buffer;
  params.serialize(buffer);
  const auto bytes = buffer.str();
  const auto loaded = ParameterSet::deserialize(buffer);
  CHECK(loaded == params);
  CHECK(loaded.entries().size() == 2);
  CHECK(loaded.entry("a").shape == std::vector<std::size_t>{2, 3});
  CHECK(loaded.tensor("b").numel() == 4);
  CHECK(std::signbit(loaded.values("b")[1]));

  std::string wrong = bytes;
  wrong[4] = 9;  // version field follows the 4-byte magic
  std::stringstream bad(wrong);
  CHECK_THROWS_AS(ParameterSet::deserialize(bad), VersionMismatch);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS(ParameterSet::deserialize(truncated));
  CHECK_THROWS_AS(params.add("a", {1}), std::invalid_argument);
}

TEST_CASE("tensor") {
  const Tensor t({2, 2}, {1.0, 2.0, 3.0, 4.0});
  CHECK(t.all_finite());
  CHECK(t.as_matrix()(1, 0) == 3.0);
  CHECK(Tensor::from_matrix(t.as_matrix()) == t);
  CHECK_FALSE(Tensor({1}, {std::nan("")}).all_finite());
}
