#include "addthin/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace addthin {

double seq_distance(const EventSequence& a, const EventSequence& b) {
  if (a.t_max() != b.t_max()) throw std::invalid_argument("seq_distance: t_max mismatch");
  const auto ta = a.times();
  const auto tb = b.times();
  std::size_t i = 0;
  std::size_t j = 0;
  long diff = 0;
  double last = 0.0;
  double area = 0.0;
  while (i < ta.size() || j < tb.size()) {
    const double next = (j >= tb.size() || (i < ta.size() && ta[i] <= tb[j])) ? ta[i] : tb[j];
    area += static_cast<double>(std::labs(diff)) * (next - last);
    last = next;
    while (i < ta.size() && ta[i] == next) {
      ++diff;
      ++i;
    }
    while (j < tb.size() && tb[j] == next) {
      --diff;
      ++j;
    }
  }
  area += static_cast<double>(std::labs(diff)) * (a.t_max() - last);
  return area / a.t_max();
}

namespace {

Eigen::MatrixXd distance_matrix(std::span<const EventSequence> x, std::span<const EventSequence> y, bool symmetric) {
  Eigen::MatrixXd d(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = symmetric ? i : 0; j < y.size(); ++j) {
      d(i, j) = seq_distance(x[i], y[j]);
      if (symmetric) d(j, i) = d(i, j);
    }
  }
  return d;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double pooled_median(const Eigen::MatrixXd& daa, const Eigen::MatrixXd& dbb, const Eigen::MatrixXd& dab) {
  std::vector<double> pairs;
  pairs.reserve(static_cast<std::size_t>(daa.size() / 2 + dbb.size() / 2 + dab.size()));
  for (Eigen::Index i = 0; i < daa.rows(); ++i)
    for (Eigen::Index j = i + 1; j < daa.cols(); ++j) pairs.push_back(daa(i, j));
  for (Eigen::Index i = 0; i < dbb.rows(); ++i)
    for (Eigen::Index j = i + 1; j < dbb.cols(); ++j) pairs.push_back(dbb(i, j));
  for (Eigen::Index i = 0; i < dab.size(); ++i) pairs.push_back(dab.data()[i]);
  return median_of(std::move(pairs));
}

}  // namespace

double median_bandwidth(std::span<const EventSequence> a, std::span<const EventSequence> b) {
  return pooled_median(distance_matrix(a, a, true), distance_matrix(b, b, true), distance_matrix(a, b, false));
}

MmdResult mmd(std::span<const EventSequence> a, std::span<const EventSequence> b, std::optional<double> bandwidth) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("mmd: need at least 2 samples per side");
  if (bandwidth && !(*bandwidth > 0.0)) throw std::invalid_argument("mmd: bandwidth must be positive");
  const auto daa = distance_matrix(a, a, true);
  const auto dbb = distance_matrix(b, b, true);
  const auto dab = distance_matrix(a, b, false);
  double sigma = bandwidth ? *bandwidth : pooled_median(daa, dbb, dab);
  if (!(sigma > 0.0)) sigma = 1.0;
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  auto kernel_sum = [gamma](const Eigen::MatrixXd& d, bool skip_diagonal) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < d.cols(); ++j)
        if (!skip_diagonal || i != j) total += std::exp(-gamma * d(i, j) * d(i, j));
    return total;
  };
  const auto m = static_cast<double>(a.size());
  const auto n = static_cast<double>(b.size());
  const double estimate = kernel_sum(daa, true) / (m * (m - 1.0)) + kernel_sum(dbb, true) / (n * (n - 1.0)) -
                          2.0 * kernel_sum(dab, false) / (m * n);
  return {std::sqrt(std::max(estimate, 0.0)), sigma};
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Integrate |F_a^{-1}(q) - F_b^{-1}(q)| over q by merging both quantile grids.
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double q = 0.0;
  double total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double qa = static_cast<double>(i + 1) / na;
    const double qb = static_cast<double>(j + 1) / nb;
    const double next = std::min(qa, qb);
    total += (next - q) * std::abs(a[i] - b[j]);
    q = next;
    if (qa <= next) ++i;
    if (qb <= next) ++j;
  }
  return total;
}

double count_wasserstein(std::span<const EventSequence> a, std::span<const EventSequence> b, bool normalize) {
  if (a.empty() || b.empty()) throw std::invalid_argument("count_wasserstein: empty sample set");
  std::vector<double> ca;
  std::vector<double> cb;
  for (const auto& s : a) ca.push_back(static_cast<double>(s.size()));
  for (const auto& s : b) cb.push_back(static_cast<double>(s.size()));
  double scale = 1.0;
  if (normalize) {
    const double mean = std::accumulate(cb.begin(), cb.end(), 0.0) / static_cast<double>(cb.size());
    scale = mean > 0.0 ? mean : 1.0;
  }
  return wasserstein1(std::move(ca), std::move(cb)) / scale;
}

double forecast_wasserstein(std::span<const double> pred, std::span<const double> truth, Window window) {
  if (!(window.end > window.start)) throw std::invalid_argument("forecast_wasserstein: empty window");
  auto relative = [&](std::span<const double> times) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
      if (t < window.start || t > window.end) throw std::invalid_argument("forecast_wasserstein: event outside window");
      out.push_back(t - window.start);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  auto p = relative(pred);
  auto q = relative(truth);
  const auto len = std::max(p.size(), q.size());
  p.resize(len, window.length());
  q.resize(len, window.length());
  double total = 0.0;
  for (std::size_t i = 0; i < len; ++i) total += std::abs(p[i] - q[i]);
  return total;
}

double count_mape(long pred_count, long truth_count) {
  if (pred_count < 0 || truth_count < 0) throw std::invalid_argument("count_mape: negative count");
  return static_cast<double>(std::labs(pred_count - truth_count)) / static_cast<double>(std::max(truth_count, 1L));
}

EventSequence hpp_baseline_forecast(const EventSequence& history, Window window, RngStream& rng) {
  if (!(window.end > window.start)) throw std::invalid_argument("hpp_baseline_forecast: empty window");
  const double rate = static_cast<double>(history.size()) / history.t_max();
  std::poisson_distribution<long> count_dist(rate * window.length());
  const long count = rate > 0.0 ? count_dist(rng) : 0;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) times.push_back(window.start + window.length() * rng.uniform_pos());
  return EventSequence::from_unsorted(std::move(times), window.end);
}

}  // namespace addthin
