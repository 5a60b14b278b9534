#include "addthin/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace addthin::nn {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)), values(shape_size(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  if (shape_size(shape) != values.size()) throw std::invalid_argument("Tensor: shape does not match value count");
}

bool Tensor::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Matrix Tensor::as_matrix() const {
  if (shape.size() > 2) throw std::invalid_argument("Tensor::as_matrix: rank > 2");
  const auto rows = static_cast<Eigen::Index>(shape.size() == 2 ? shape[0] : 1);
  const auto cols = static_cast<Eigen::Index>(shape.empty() ? 1 : shape.back());
  return Eigen::Map<const Matrix>(values.data(), rows, cols);
}

Tensor Tensor::from_matrix(const Matrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  std::copy(m.data(), m.data() + m.size(), t.values.begin());
  return t;
}

}  // namespace addthin::nn
