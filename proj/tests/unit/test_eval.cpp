#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "addthin/eval.hpp"
#include "addthin/tpp.hpp"
#include "oracles.hpp"

using namespace addthin;

namespace {

// Midpoint-rule integral of |N_a - N_b| on a fine grid.
double grid_distance(const EventSequence& a, const EventSequence& b, int cells = 200000) {
  const double T = a.t_max();
  double total = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double u = (i + 0.5) * T / cells;
    const auto na = std::upper_bound(a.times().begin(), a.times().end(), u) - a.times().begin();
    const auto nb = std::upper_bound(b.times().begin(), b.times().end(), u) - b.times().begin();
    total += std::abs(static_cast<double>(na - nb));
  }
  return total / cells;
}

// Direct double-sum form of the unbiased squared MMD.
double direct_mmd(const std::vector<EventSequence>& a, const std::vector<EventSequence>& b, double sigma) {
  auto k = [&](const EventSequence& x, const EventSequence& y) {
    const double d = grid_distance(x, y, 4000);
    return std::exp(-d * d / (2.0 * sigma * sigma));
  };
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
  const double m = a.size();
  const double n = b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) xx += k(a[i], a[j]);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (i != j) yy += k(b[i], b[j]);
  for (const auto& x : a)
    for (const auto& y : b) xy += k(x, y);
  const double est = xx / (m * (m - 1)) + yy / (n * (n - 1)) - 2.0 * xy / (m * n);
  return std::sqrt(std::max(est, 0.0));
}

std::vector<EventSequence> hpp_set(double rate, int count, RngStream& rng) {
  std::vector<EventSequence> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_hpp(rate, 1.0, rng));
  return out;
}

std::vector<EventSequence> with_counts(const std::vector<int>& counts) {
  std::vector<EventSequence> out;
  for (int c : counts) {
    std::vector<double> times;
    for (int i = 1; i <= c; ++i) times.push_back(static_cast<double>(i) / (c + 1));
    out.emplace_back(times, 1.0);
  }
  return out;
}

}  // namespace

TEST_CASE("sequence distance") {
  const EventSequence a({0.5}, 1.0);
  const EventSequence empty(1.0);
  CHECK(seq_distance(a, a) == 0.0);
  CHECK(seq_distance(a, empty) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(seq_distance(EventSequence({0.2}, 1.0), EventSequence({0.4}, 1.0)) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_THROWS_AS(seq_distance(a, EventSequence(2.0)), std::invalid_argument);

  RngStream rng(1, 0);
  for (int i = 0; i < 20; ++i) {
    const auto x = sample_hpp(8.0, 3.0, rng);
    const auto y = sample_hpp(5.0, 3.0, rng);
    CHECK(std::abs(seq_distance(x, y) - grid_distance(x, y)) < 1e-3);
  }
}

TEST_CASE("sequence distance is a pseudometric") {
  RngStream rng(2, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto x = sample_hpp(6.0, 1.0, rng);
    const auto y = sample_hpp(6.0, 1.0, rng);
    const auto z = sample_hpp(6.0, 1.0, rng);
    const double xy = seq_distance(x, y);
    CHECK(xy == seq_distance(y, x));
    CHECK(xy >= 0.0);
    CHECK(seq_distance(x, z) <= xy + seq_distance(y, z) + 1e-12);
  }
}

TEST_CASE("mmd") {
  RngStream rng(3, 0);
  const auto a = hpp_set(5.0, 12, rng);
  const auto b = hpp_set(9.0, 15, rng);
  const auto r = mmd(a, b, 0.7);
  CHECK(r.bandwidth == 0.7);
  CHECK(r.value == doctest::Approx(direct_mmd(a, b, 0.7)).epsilon(1e-3));
  CHECK(mmd(a, b).value == doctest::Approx(mmd(b, a).value).epsilon(1e-12));
  CHECK(mmd(a, a).value == 0.0);

  std::vector<double> pooled;
  std::vector<EventSequence> all = a;
  all.insert(all.end(), b.begin(), b.end());
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) pooled.push_back(seq_distance(all[i], all[j]));
  std::sort(pooled.begin(), pooled.end());
  const std::size_t mid = pooled.size() / 2;
  const double median = pooled.size() % 2 ? pooled[mid] : 0.5 * (pooled[mid - 1] + pooled[mid]);
  CHECK(median_bandwidth(a, b) == doctest::Approx(median).epsilon(1e-12));

  const auto same1 = hpp_set(50.0, 1000, rng);
  const auto same2 = hpp_set(50.0, 1000, rng);
  CHECK(mmd(same1, same2).value < 0.05);
  const auto low = hpp_set(10.0, 300, rng);
  const auto high = hpp_set(100.0, 300, rng);
  CHECK(mmd(low, high).value > 0.2);

  const std::vector<EventSequence> one{a[0]};
  CHECK_THROWS_AS(mmd(one, b), std::invalid_argument);
  CHECK_THROWS_AS(mmd(a, b, -1.0), std::invalid_argument);
}

TEST_CASE("count wasserstein") {
  const auto x = with_counts({1, 2, 3});
  const auto y = with_counts({2, 3, 4});
  CHECK(count_wasserstein(x, x) == 0.0);
  CHECK(count_wasserstein(x, y, false) == doctest::Approx(1.0));
  CHECK(count_wasserstein(x, y) == doctest::Approx(1.0 / 3.0));
  CHECK(wasserstein1({0.0, 1.0}, {0.0, 0.0, 1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(wasserstein1({0.0}, {0.0, 1.0}) == doctest::Approx(0.5));

  RngStream rng(4, 0);
  CHECK(count_wasserstein(hpp_set(50.0, 1000, rng), hpp_set(50.0, 1000, rng)) < 0.02);
  CHECK_THROWS_AS(count_wasserstein(std::vector<EventSequence>{}, y), std::invalid_argument);
}

TEST_CASE("forecast wasserstein") {
  const Window unit{0.0, 1.0};
  const std::vector<double> p1{0.2};
  const std::vector<double> t1{0.4};
  const std::vector<double> p2{0.2, 0.3};
  CHECK(forecast_wasserstein(p1, p1, unit) == 0.0);
  CHECK(forecast_wasserstein(p1, t1, unit) == doctest::Approx(0.2));
  CHECK(forecast_wasserstein(p2, p1, unit) == doctest::Approx(0.7));
  CHECK(forecast_wasserstein(p1, p2, unit) == doctest::Approx(0.7));

  const Window shifted{30.0, 40.0};
  const std::vector<double> a{31.0, 35.0};
  const std::vector<double> b{32.0};
  CHECK(forecast_wasserstein(a, b, shifted) == doctest::Approx(1.0 + 5.0));
  CHECK(forecast_wasserstein(std::vector<double>{}, b, shifted) == doctest::Approx(8.0));

  const std::vector<double> outside{41.0};
  CHECK_THROWS_AS(forecast_wasserstein(outside, b, shifted), std::invalid_argument);

  RngStream rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const auto x = sample_hpp(0.5, 10.0, rng);
    const auto y = sample_hpp(0.8, 10.0, rng);
    std::vector<double> xs(x.times().begin(), x.times().end());
    std::vector<double> ys(y.times().begin(), y.times().end());
    std::vector<double> px = xs;
    std::vector<double> py = ys;
    px.resize(std::max(xs.size(), ys.size()), 10.0);
    py.resize(px.size(), 10.0);
    double brute = 0.0;
    for (std::size_t k = 0; k < px.size(); ++k) brute += std::abs(px[k] - py[k]);
    CHECK(forecast_wasserstein(xs, ys, Window{0.0, 10.0}) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(forecast_wasserstein(xs, ys, Window{0.0, 10.0}) == forecast_wasserstein(ys, xs, Window{0.0, 10.0}));
  }
}

TEST_CASE("count mape") {
  CHECK(count_mape(8, 10) == doctest::Approx(0.2));
  CHECK(count_mape(10, 10) == 0.0);
  CHECK(count_mape(3, 0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(count_mape(-1, 3), std::invalid_argument);
  CHECK_THROWS_AS(count_mape(1, -3), std::invalid_argument);
}

TEST_CASE("hpp baseline forecast") {
  RngStream rng(6, 0);
  CHECK(hpp_baseline_forecast(EventSequence(20.0), Window{20.0, 30.0}, rng).empty());

  const auto history = sample_hpp(2.0, 500.0, rng);
  const double rate = static_cast<double>(history.size()) / 500.0;
  const Window window{500.0, 510.0};
  std::vector<long> counts;
  for (int i = 0; i < 10000; ++i) {
    const auto f = hpp_baseline_forecast(history, window, rng);
    CHECK(f.t_max() == 510.0);
    if (!f.empty()) {
      CHECK(f[0] > 500.0);
      CHECK(f[f.size() - 1] <= 510.0);
    }
    counts.push_back(static_cast<long>(f.size()));
  }
  CHECK(std::abs(oracle::mean(counts) - rate * 10.0) < 3.0 * std::sqrt(rate * 10.0 / 10000));
}
