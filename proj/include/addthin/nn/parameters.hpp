#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "addthin/nn/tensor.hpp"

namespace addthin::nn {

/// Named trainable tensors stored contiguously, in registration order.
///
/// Gradients live in a flat buffer with the same layout as the values, so a
/// per-worker gradient is just a `std::vector<double>` of `size()` entries.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  /// Registers a zero-initialized tensor and returns its flat offset.
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const Entry& entry(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const;

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> grads() { return grads_; }
  [[nodiscard]] std::span<const double> grads() const { return grads_; }
  std::span<double> values(std::string_view name);
  [[nodiscard]] std::span<const double> values(std::string_view name) const;
  [[nodiscard]] const double* data(std::size_t offset) const { return values_.data() + offset; }

  [[nodiscard]] Tensor tensor(std::string_view name) const;
  void zero_grad();

  /// Little-endian records: name, shape, raw float64 values, after a
  /// "ATPS" magic and format version.
  void serialize(std::ostream& out) const;
  static ParameterSet deserialize(std::istream& in);

  static constexpr std::uint32_t kFormatVersion = 1;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<Entry> entries_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

}  // namespace addthin::nn
