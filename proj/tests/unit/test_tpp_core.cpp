#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "addthin/event_sequence.hpp"
#include "addthin/rng.hpp"
#include "addthin/tpp.hpp"
#include "oracles.hpp"

using namespace addthin;

TEST_CASE("event sequence validates its invariants") {
  CHECK_THROWS_AS(EventSequence({0.0, 0.5}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(EventSequence({0.5, 1.5}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(EventSequence({0.5, 0.2}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(EventSequence({0.5}, 0.0), std::invalid_argument);
  CHECK_NOTHROW(EventSequence({1.0}, 1.0));
  CHECK(EventSequence(2.0).empty());

  const EventSequence deduped({0.2, 0.2, 0.7}, 1.0);
  CHECK(deduped.size() == 2);
  CHECK(deduped[0] == 0.2);
  CHECK(deduped[1] == 0.7);

  const auto sorted = EventSequence::from_unsorted({0.9, 0.1, 0.4}, 1.0);
  CHECK(sorted.values() == std::vector<double>{0.1, 0.4, 0.9});
  CHECK(sorted.between(0.1, 0.9) == std::vector<double>{0.4, 0.9});
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  RngStream c(42, 8);
  bool all_equal_c = true;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    all_equal_c = all_equal_c && (x == c());
  }
  CHECK_FALSE(all_equal_c);
  auto s1 = RngStream(1, 0).substream(3);
  auto s2 = RngStream(1, 0).substream(3);
  auto s3 = RngStream(1, 0).substream(4);
  CHECK(s1() == s2());
  CHECK(s1() != s3());
  RngStream u(5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    const double y = u.uniform_pos();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK((y > 0.0 && y <= 1.0));
  }
}

TEST_CASE("sample_hpp") {
  RngStream rng(1, 0);
  CHECK(sample_hpp(0.0, 1.0, rng).empty());
  CHECK_THROWS_AS(sample_hpp(-1.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_hpp(1.0, 0.0, rng), std::invalid_argument);

  std::vector<long> unit_counts;
  std::vector<long> counts;
  for (int i = 0; i < 100000; ++i) {
    unit_counts.push_back(static_cast<long>(sample_hpp(1.0, 1.0, rng).size()));
    const auto s = sample_hpp(5.0, 2.0, rng);
    counts.push_back(static_cast<long>(s.size()));
    if (i < 100) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(s[j] > 0.0);
        CHECK(s[j] <= 2.0);
        if (j > 0) CHECK(s[j] > s[j - 1]);
      }
    }
  }
  CHECK(std::abs(oracle::mean(unit_counts) - 1.0) < 0.01);
  CHECK(std::abs(oracle::variance(counts) - 10.0) < 0.15);
  CHECK(oracle::poisson_chi_square_pvalue(counts, 10.0) > 1e-3);
}

TEST_CASE("thin") {
  RngStream rng(2, 0);
  const auto seq = sample_hpp(10000.0, 1.0, rng);
  const auto all = thin(seq, 1.0, rng);
  CHECK(all.kept == seq);
  CHECK(all.removed.empty());
  const auto none = thin(seq, 0.0, rng);
  CHECK(none.kept.empty());
  CHECK(none.removed == seq);
  CHECK_THROWS_AS(thin(seq, 1.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(thin(seq, -0.1, rng), std::invalid_argument);

  const auto fixed = EventSequence::from_unsorted([&] {
    std::vector<double> t(10000);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1) / 10000.0;
    return t;
  }(), 1.0);
  const auto half = thin(fixed, 0.5, rng);
  CHECK(std::abs(static_cast<double>(half.kept.size()) - 5000.0) <= 150.0);
  CHECK(superpose(half.kept, half.removed) == fixed);
}

TEST_CASE("superpose") {
  const EventSequence a({0.2}, 1.0);
  const EventSequence b({0.5}, 1.0);
  CHECK(superpose(EventSequence(1.0), b) == b);
  CHECK(superpose(a, b).values() == std::vector<double>{0.2, 0.5});
  CHECK_THROWS_AS(superpose(a, EventSequence({0.5}, 2.0)), std::invalid_argument);

  RngStream rng(3, 0);
  double total = 0.0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    total += static_cast<double>(superpose(sample_hpp(0.5, 1.0, rng), sample_hpp(0.5, 1.0, rng)).size());
  }
  CHECK(std::abs(total / trials - 1.0) < 3.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("poisson_nll") {
  CHECK(poisson_nll([](double) { return 1.0; }, 1.0, EventSequence({0.5}, 1.0)) == doctest::Approx(1.0));
  CHECK(poisson_nll([](double) { return 2.0; }, 2.0, EventSequence({0.25, 0.75}, 1.0)) ==
        doctest::Approx(2.0 - 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(poisson_nll([](double t) { return 2.0 * t; }, 1.0, EventSequence({0.5}, 1.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(poisson_nll([](double) { return 0.0; }, 0.0, EventSequence({0.5}, 1.0)), std::domain_error);
  const auto a = poisson_nll([](double t) { return 1.0 + t; }, 1.5, EventSequence::from_unsorted({0.7, 0.1, 0.4}, 1.0));
  const auto b = poisson_nll([](double t) { return 1.0 + t; }, 1.5, EventSequence({0.1, 0.4, 0.7}, 1.0));
  CHECK(a == b);
}

TEST_CASE("rescale") {
  const auto r = rescale(EventSequence({50.0}, 100.0), 1.0);
  CHECK(r.t_max() == 1.0);
  CHECK(r[0] == doctest::Approx(0.5));
  const auto e = rescale(EventSequence(3.0), 1.0);
  CHECK(e.empty());
  CHECK(e.t_max() == 1.0);
  RngStream rng(4, 0);
  const auto s = sample_hpp(1.0, 100.0, rng);
  const auto back = rescale(rescale(s, 1.0), s.t_max());
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(back[i] - s[i]) <= 1e-12 * s[i]);
  CHECK_THROWS_AS(rescale(s, 0.0), std::invalid_argument);
}
