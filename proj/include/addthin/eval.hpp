#pragma once

#include <optional>
#include <span>
#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/rng.hpp"

namespace addthin {

/// (1/T) * integral over [0, T] of |N_a(u) - N_b(u)|, computed exactly.
double seq_distance(const EventSequence& a, const EventSequence& b);

struct MmdResult {
  double value = 0.0;
  double bandwidth = 0.0;
};

/// Median of all pairwise seq_distance values over the pooled samples.
double median_bandwidth(std::span<const EventSequence> a, std::span<const EventSequence> b);

/// Unbiased Gaussian-kernel MMD on seq_distance, reported as sqrt(max(MMD^2, 0)).
/// A missing bandwidth selects the median heuristic.
MmdResult mmd(std::span<const EventSequence> a, std::span<const EventSequence> b,
              std::optional<double> bandwidth = std::nullopt);

/// W1 distance between two empirical distributions on the real line.
double wasserstein1(std::vector<double> a, std::vector<double> b);

/// W1 between sequence-length distributions. When `normalize` is set the
/// counts are divided by the mean length of the reference set `b`.
double count_wasserstein(std::span<const EventSequence> a, std::span<const EventSequence> b, bool normalize = true);

struct Window {
  double start = 0.0;
  double end = 1.0;
  [[nodiscard]] double length() const { return end - start; }
};

/// Sum of |pred_i - truth_i| over sorted, window-relative times, with the
/// shorter sequence padded by the window length.
double forecast_wasserstein(std::span<const double> pred, std::span<const double> truth, Window window);

double count_mape(long pred_count, long truth_count);

/// HPP on the window with rate |history| / history.t_max().
EventSequence hpp_baseline_forecast(const EventSequence& history, Window window, RngStream& rng);

}  // namespace addthin
