#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/rng.hpp"

namespace addthin {

enum class ProcessKind { hawkes1, hawkes2, self_correcting, ipp, renewal, mod_renewal };

std::string to_string(ProcessKind kind);
/// Throws std::invalid_argument for unknown names.
ProcessKind parse_process_kind(const std::string& name);

/// One exponential excitation term a * exp(-b (t - t_i)).
struct Excitation {
  double a = 0.0;
  double b = 1.0;
};

/// lambda(t) = base * (1 + amplitude * sin(2 pi t / period)).
struct SinusoidalIntensity {
  double base = 1.0;
  double amplitude = 0.99;
  double period = 100.0;

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double supremum() const;
  /// Integral of the rate over [0, t].
  [[nodiscard]] double cumulative(double t) const;
  /// Inverse of `cumulative` on [0, t_max].
  [[nodiscard]] double inverse_cumulative(double s, double t_max) const;
  void validate() const;
};

struct InterEventLaw {
  enum class Kind { lognormal, exponential, gamma, deterministic };
  Kind kind = Kind::lognormal;
  double mean = 1.0;
  double stddev = 1.0;

  double sample(RngStream& rng) const;
  void validate() const;
};

struct DatasetSpec {
  ProcessKind kind = ProcessKind::hawkes1;
  int n_sequences = 1000;
  double t_max = 100.0;
  std::uint64_t seed = 0;

  double hawkes_mu = 0.2;
  std::vector<Excitation> excitations{{0.8, 1.0}};
  double sc_mu = 1.0;
  double sc_alpha = 1.0;
  SinusoidalIntensity intensity;
  InterEventLaw law;

  void validate() const;
};

/// Parameters calibrated so the mean sequence length on [0, 100] matches the
/// reference synthetic benchmark statistics.
DatasetSpec default_spec(ProcessKind kind);
/// Reference mean sequence length on [0, 100] for each synthetic process.
double reference_mean_length(ProcessKind kind);

/// Exponential-kernel Hawkes process by Ogata thinning:
///   lambda(t) = mu + sum_{t_i < t} sum_k a_k exp(-b_k (t - t_i)).
EventSequence gen_hawkes(double mu, std::span<const Excitation> excitations, double t_max, RngStream& rng);
/// Self-correcting process lambda(t) = exp(mu t - alpha N(t)).
EventSequence gen_self_correcting(double mu, double alpha, double t_max, RngStream& rng);
EventSequence gen_ipp(const SinusoidalIntensity& intensity, double t_max, RngStream& rng);
EventSequence gen_renewal(const InterEventLaw& law, double t_max, RngStream& rng);
/// Renewal process run in operational time and mapped through the inverse
/// cumulative intensity of `modulation`.
EventSequence gen_mod_renewal(const InterEventLaw& law, const SinusoidalIntensity& modulation, double t_max,
                              RngStream& rng);

EventSequence generate_one(const DatasetSpec& spec, RngStream& rng);
/// Sequence i uses substream i of RngStream(spec.seed, 0).
std::vector<EventSequence> generate(const DatasetSpec& spec);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Random disjoint partition of 0..n-1 with sizes round(r0 n), round(r1 n), rest.
SplitIndices make_splits(std::size_t n, std::array<double, 3> ratios, RngStream& rng);

struct DatasetSplits {
  std::vector<EventSequence> train;
  std::vector<EventSequence> val;
  std::vector<EventSequence> test;
};

DatasetSplits make_splits(const std::vector<EventSequence>& sequences, std::array<double, 3> ratios, RngStream& rng);
DatasetSplits apply_splits(const std::vector<EventSequence>& sequences, const SplitIndices& idx);

}  // namespace addthin
