#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace addthin::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Dense row-major array with an explicit shape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  [[nodiscard]] std::size_t numel() const { return values.size(); }
  [[nodiscard]] bool all_finite() const;

  /// Rank-1 tensors map to a single row; rank-2 to (rows, cols).
  [[nodiscard]] Matrix as_matrix() const;
  static Tensor from_matrix(const Matrix& m);

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);

}  // namespace addthin::nn
