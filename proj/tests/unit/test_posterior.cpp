#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "addthin/posterior.hpp"
#include "addthin/schedule.hpp"
#include "addthin/tpp.hpp"
#include "oracles.hpp"

using namespace addthin;

TEST_CASE("decompose") {
  const auto d = decompose(EventSequence({0.2, 0.8}, 1.0), EventSequence({0.2, 0.5}, 1.0), 3);
  CHECK(d.kept.values() == std::vector<double>{0.2});
  CHECK(d.missing.values() == std::vector<double>{0.8});
  CHECK(d.added.values() == std::vector<double>{0.5});
  CHECK(d.step == 3);

  const EventSequence t0({0.1, 0.3, 0.9}, 1.0);
  const auto same = decompose(t0, t0, 1);
  CHECK(same.kept == t0);
  CHECK(same.missing.empty());
  CHECK(same.added.empty());

  const EventSequence tn({0.4, 0.6}, 1.0);
  const auto from_empty = decompose(EventSequence(1.0), tn, 1);
  CHECK(from_empty.kept.empty());
  CHECK(from_empty.missing.empty());
  CHECK(from_empty.added == tn);
}

TEST_CASE("case probabilities") {
  const auto s = NoiseSchedule::from_alpha_bar({1.0, 0.8, 0.6}, 1.0);
  CHECK(keep_prob_C(s, 2) == doctest::Approx(0.5));
  CHECK(keep_prob_C(s, 1) == doctest::Approx(1.0));
  const auto flat = NoiseSchedule::from_alpha_bar({1.0, 0.5, 0.5}, 1.0);
  CHECK(keep_prob_C(flat, 2) == 0.0);

  // alpha[2] = 0.75, alpha_bar[2] = 0.6
  CHECK(keep_prob_E(s, 2) == doctest::Approx(0.375));
  CHECK(keep_prob_E(s, 1) == doctest::Approx(0.0));
  CHECK(rate_D(s, 1) == 0.0);
  // alpha_bar[1] = 0.5, alpha[2] = 0.8
  const auto d = NoiseSchedule::from_alpha_bar({1.0, 0.5, 0.4}, 1.0);
  CHECK(rate_D(d, 2) == doctest::Approx(0.1));

  for (const auto& sched : {cosine_schedule(100), cosine_schedule(10), cosine_schedule(1000, 2.0)}) {
    for (int n = 1; n <= sched.n_steps; ++n) {
      const double a = sched.alpha[n];
      const double ab = sched.alpha_bar[n];
      const double ab_prev = sched.alpha_bar[n - 1];
      const double lambda_e = (1.0 - ab_prev) * a * sched.lambda_hpp;
      const double lambda_f = (1.0 - a) * sched.lambda_hpp;
      CHECK(std::abs(keep_prob_E(sched, n) - lambda_e / (lambda_e + lambda_f)) < 1e-12);
      CHECK(std::abs(rate_D(sched, n) + lambda_e - (1.0 - ab_prev) * sched.lambda_hpp) < 1e-12);
      CHECK(std::abs(lambda_e + lambda_f - (1.0 - ab) * sched.lambda_hpp) < 1e-12);
      CHECK(keep_prob_C(sched, n) >= 0.0);
      CHECK(keep_prob_C(sched, n) <= 1.0);
      CHECK(keep_prob_E(sched, n) >= 0.0);
      CHECK(keep_prob_E(sched, n) <= 1.0);
      CHECK(rate_D(sched, n) >= 0.0);
    }
  }
}

TEST_CASE("posterior sampling structure") {
  const auto s = cosine_schedule(100);
  RngStream rng(10, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t0 = sample_hpp(15.0, 1.0, rng);
    const auto t1 = corrupt(t0, 1, s, rng).events;
    CHECK(sample_posterior(t0, t1, 1, s, rng) == t0);

    const int n = 2 + trial % 99;
    const auto tn = corrupt(t0, n, s, rng).events;
    const auto prev = sample_posterior(t0, tn, n, s, rng);
    const auto parts = decompose(t0, tn, n);
    for (double t : parts.kept.times()) {
      CHECK(std::binary_search(prev.times().begin(), prev.times().end(), t));
    }
  }
  const EventSequence t0({0.2, 0.4}, 1.0);
  const auto no_noise = NoiseSchedule::from_alpha_bar({1.0, 1.0, 1.0}, 1.0);
  CHECK(sample_posterior(t0, t0, 2, no_noise, rng) == t0);
}

TEST_CASE("posterior step is consistent with the forward marginal") {
  const auto s = cosine_schedule(100);
  RngStream rng(11, 0);
  const auto t0 = sample_hpp(10.0, 1.0, rng);
  for (int n : {2, 50, 100}) {
    std::vector<long> via_posterior;
    std::vector<long> direct;
    for (int i = 0; i < 20000; ++i) {
      const auto tn = corrupt(t0, n, s, rng).events;
      via_posterior.push_back(static_cast<long>(sample_posterior(t0, tn, n, s, rng).size()));
      direct.push_back(static_cast<long>(corrupt(t0, n - 1, s, rng).events.size()));
    }
    CHECK(oracle::integer_w1(via_posterior, direct) < 0.05);
  }
}

TEST_CASE("poisson counts conditioned on their sum are binomial") {
  std::mt19937_64 gen(12);
  const double l1 = 2.0;
  const double l2 = 5.0;
  std::poisson_distribution<long> p1(l1);
  std::poisson_distribution<long> p2(l2);
  const long k = 7;
  std::vector<long> draws;
  while (draws.size() < 20000) {
    const long x1 = p1(gen);
    const long x2 = p2(gen);
    if (x1 + x2 == k) draws.push_back(x1);
  }
  CHECK(oracle::binomial_tv(draws, k, l1 / (l1 + l2)) < 0.03);
}
