#include "addthin/nn/parameters.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "addthin/binary_io.hpp"
#include "addthin/errors.hpp"

namespace addthin::nn {
namespace {
constexpr char kMagic[4] = {'A', 'T', 'P', 'S'};
}

std::size_t ParameterSet::add(std::string name, std::vector<std::size_t> shape) {
  if (contains(name)) throw std::invalid_argument("ParameterSet: duplicate parameter " + name);
  Entry e{std::move(name), std::move(shape), values_.size(), 0};
  e.size = shape_size(e.shape);
  values_.resize(values_.size() + e.size, 0.0);
  grads_.resize(values_.size(), 0.0);
  entries_.push_back(std::move(e));
  return entries_.back().offset;
}

const ParameterSet::Entry& ParameterSet::entry(std::string_view name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
  if (it == entries_.end()) throw std::out_of_range("ParameterSet: no parameter named " + std::string(name));
  return *it;
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

std::span<double> ParameterSet::values(std::string_view name) {
  const auto& e = entry(name);
  return std::span<double>(values_).subspan(e.offset, e.size);
}

std::span<const double> ParameterSet::values(std::string_view name) const {
  const auto& e = entry(name);
  return std::span<const double>(values_).subspan(e.offset, e.size);
}

Tensor ParameterSet::tensor(std::string_view name) const {
  const auto& e = entry(name);
  auto v = values(name);
  return {e.shape, std::vector<double>(v.begin(), v.end())};
}

void ParameterSet::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

void ParameterSet::serialize(std::ostream& out) const {
  out.write(kMagic, 4);
  binary::write_u32(out, kFormatVersion);
  binary::write_u64(out, entries_.size());
  for (const auto& e : entries_) {
    binary::write_string(out, e.name);
    binary::write_u32(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto dim : e.shape) binary::write_u64(out, dim);
    for (std::size_t i = 0; i < e.size; ++i) binary::write_f64(out, values_[e.offset + i]);
  }
}

ParameterSet ParameterSet::deserialize(std::istream& in) {
  char magic[4];
  binary::read_exact(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("ParameterSet: bad magic");
  const auto version = binary::read_u32(in);
  if (version != kFormatVersion) throw VersionMismatch("ParameterSet", version, kFormatVersion);
  ParameterSet ps;
  const auto count = binary::read_u64(in);
  for (std::uint64_t k = 0; k < count; ++k) {
    auto name = binary::read_string(in);
    const auto rank = binary::read_u32(in);
    std::vector<std::size_t> shape(rank);
    for (auto& dim : shape) dim = binary::read_u64(in);
    const auto offset = ps.add(std::move(name), std::move(shape));
    const auto size = ps.entries_.back().size;
    for (std::size_t i = 0; i < size; ++i) ps.values_[offset + i] = binary::read_f64(in);
  }
  return ps;
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    if (a.entries_[i].name != b.entries_[i].name || a.entries_[i].shape != b.entries_[i].shape) return false;
  }
  // Bitwise comparison: NaN payloads and signed zeros must match too.
  return a.values_.size() == b.values_.size() &&
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0;
}

}  // namespace addthin::nn
