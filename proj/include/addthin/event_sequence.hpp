#pragma once

#include <span>
#include <vector>

namespace addthin {

/// Strictly increasing arrival times on the interval (0, t_max].
///
/// Construction validates the invariants: times must be non-decreasing and
/// lie in (0, t_max]. Exact duplicates are dropped with a warning on stderr
/// since ties have probability zero under any model here but can appear in
/// ingested files.
class EventSequence {
 public:
  /// Empty sequence on the canonical interval (0, 1].
  EventSequence() = default;
  /// Empty sequence on (0, t_max].
  explicit EventSequence(double t_max);
  EventSequence(std::vector<double> times, double t_max);

  /// Sorts `times` first; otherwise identical to the validating constructor.
  static EventSequence from_unsorted(std::vector<double> times, double t_max);

  [[nodiscard]] std::span<const double> times() const { return times_; }
  [[nodiscard]] const std::vector<double>& values() const { return times_; }
  [[nodiscard]] double t_max() const { return t_max_; }
  [[nodiscard]] std::size_t size() const { return times_.size(); }
  [[nodiscard]] bool empty() const { return times_.empty(); }
  double operator[](std::size_t i) const { return times_[i]; }

  /// Events in (lo, hi].
  [[nodiscard]] std::vector<double> between(double lo, double hi) const;

  friend bool operator==(const EventSequence&, const EventSequence&) = default;

 private:
  std::vector<double> times_;
  double t_max_ = 1.0;
};

}  // namespace addthin
