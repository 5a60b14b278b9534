#include "addthin/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "addthin/tpp.hpp"

namespace addthin {

NoiseSchedule NoiseSchedule::from_alpha_bar(std::vector<double> alpha_bar, double lambda_hpp) {
  if (alpha_bar.size() < 2) throw std::invalid_argument("NoiseSchedule: need at least one step");
  if (!(lambda_hpp > 0.0)) throw std::invalid_argument("NoiseSchedule: lambda_hpp must be positive");
  NoiseSchedule s;
  s.n_steps = static_cast<int>(alpha_bar.size()) - 1;
  s.lambda_hpp = lambda_hpp;
  s.alpha.assign(alpha_bar.size(), 1.0);
  for (int n = 1; n <= s.n_steps; ++n) {
    s.alpha[n] = alpha_bar[n - 1] > 0.0 ? alpha_bar[n] / alpha_bar[n - 1] : 0.0;
  }
  s.alpha_bar = std::move(alpha_bar);
  return s;
}

void NoiseSchedule::check_step(int n) const {
  if (n < 1 || n > n_steps) {
    throw std::invalid_argument("step " + std::to_string(n) + " outside [1, " + std::to_string(n_steps) + "]");
  }
}

NoiseSchedule cosine_schedule(int n_steps, double lambda_hpp, double s, double min_alpha) {
  if (n_steps < 1) throw std::invalid_argument("cosine_schedule: n_steps must be >= 1");
  if (!(lambda_hpp > 0.0)) throw std::invalid_argument("cosine_schedule: lambda_hpp must be positive");
  const auto f = [&](int n) {
    const double c = std::cos((static_cast<double>(n) / n_steps + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  const double f0 = f(0);
  NoiseSchedule sched;
  sched.n_steps = n_steps;
  sched.lambda_hpp = lambda_hpp;
  sched.cosine_offset = s;
  sched.alpha_bar.assign(n_steps + 1, 1.0);
  sched.alpha.assign(n_steps + 1, 1.0);
  double prev_raw = 1.0;
  for (int n = 1; n <= n_steps; ++n) {
    const double raw = f(n) / f0;
    const double alpha = std::clamp(raw / prev_raw, min_alpha, 1.0 - 1e-12);
    prev_raw = raw;
    sched.alpha[n] = alpha;
    sched.alpha_bar[n] = sched.alpha_bar[n - 1] * alpha;
  }
  return sched;
}

NoisySequence corrupt(const EventSequence& t0, int n, const NoiseSchedule& sched, RngStream& rng) {
  sched.check_step(n);
  const double keep = sched.alpha_bar[n];
  auto [kept, removed] = thin(t0, keep, rng);
  const EventSequence added = sample_hpp((1.0 - keep) * sched.lambda_hpp, t0.t_max(), rng);

  NoisySequence out;
  std::vector<double> times;
  times.reserve(kept.size() + added.size());
  out.from_original.reserve(kept.size() + added.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < kept.size() || j < added.size()) {
    const bool take_kept = j == added.size() || (i < kept.size() && kept[i] <= added[j]);
    if (take_kept) {
      times.push_back(kept[i++]);
      out.from_original.push_back(true);
    } else {
      if (!times.empty() && times.back() == added[j]) {
        ++j;  // tie with an original point: keep the original
        continue;
      }
      times.push_back(added[j++]);
      out.from_original.push_back(false);
    }
  }
  out.events = EventSequence(std::move(times), t0.t_max());
  return out;
}

EventSequence forward_step(const EventSequence& prev, int n, const NoiseSchedule& sched, RngStream& rng) {
  sched.check_step(n);
  const double alpha = sched.alpha[n];
  auto kept = thin(prev, alpha, rng).kept;
  return superpose(kept, sample_hpp((1.0 - alpha) * sched.lambda_hpp, prev.t_max(), rng));
}

}  // namespace addthin
