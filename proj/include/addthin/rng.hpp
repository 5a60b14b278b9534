#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace addthin {

/// Reproducible random stream identified by (seed, stream id).
///
/// Backed by xoshiro256** whose state is expanded from the (seed, stream)
/// pair with SplitMix64. Child streams are derived deterministically, so
/// per-sequence streams in a batch do not depend on scheduling order.
/// Satisfies UniformRandomBitGenerator and can be used with <random>.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Independent stream keyed by this stream's identity and `id`.
  [[nodiscard]] RngStream substream(std::uint64_t id) const;

  result_type operator()();

  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform double in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream() const { return stream_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace addthin
