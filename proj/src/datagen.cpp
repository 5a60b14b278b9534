#include "addthin/datagen.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace addthin {

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::hawkes1: return "hawkes1";
    case ProcessKind::hawkes2: return "hawkes2";
    case ProcessKind::self_correcting: return "self_correcting";
    case ProcessKind::ipp: return "ipp";
    case ProcessKind::renewal: return "renewal";
    case ProcessKind::mod_renewal: return "mod_renewal";
  }
  return "unknown";
}

ProcessKind parse_process_kind(const std::string& name) {
  for (auto kind : {ProcessKind::hawkes1, ProcessKind::hawkes2, ProcessKind::self_correcting, ProcessKind::ipp,
                    ProcessKind::renewal, ProcessKind::mod_renewal}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown process kind '" + name + "'");
}

double SinusoidalIntensity::operator()(double t) const {
  return base * (1.0 + amplitude * std::sin(2.0 * std::numbers::pi * t / period));
}

double SinusoidalIntensity::supremum() const { return base * (1.0 + std::abs(amplitude)); }

double SinusoidalIntensity::cumulative(double t) const {
  const double omega = 2.0 * std::numbers::pi / period;
  return base * (t + amplitude / omega * (1.0 - std::cos(omega * t)));
}

double SinusoidalIntensity::inverse_cumulative(double s, double t_max) const {
  double lo = 0.0;
  double hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, t_max); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cumulative(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void SinusoidalIntensity::validate() const {
  if (!(base > 0.0)) throw std::invalid_argument("intensity.base must be positive");
  if (!(std::abs(amplitude) <= 1.0)) throw std::invalid_argument("intensity.amplitude must be in [-1, 1]");
  if (!(period > 0.0)) throw std::invalid_argument("intensity.period must be positive");
}

double InterEventLaw::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::lognormal: {
      const double sigma2 = std::log1p((stddev / mean) * (stddev / mean));
      std::lognormal_distribution<double> dist(std::log(mean) - 0.5 * sigma2, std::sqrt(sigma2));
      return dist(rng);
    }
    case Kind::exponential: {
      std::exponential_distribution<double> dist(1.0 / mean);
      return dist(rng);
    }
    case Kind::gamma: {
      std::gamma_distribution<double> dist((mean / stddev) * (mean / stddev), stddev * stddev / mean);
      return dist(rng);
    }
    case Kind::deterministic:
      return mean;
  }
  return mean;
}

void InterEventLaw::validate() const {
  if (!(mean > 0.0)) throw std::invalid_argument("law.mean must be positive");
  if ((kind == Kind::lognormal || kind == Kind::gamma) && !(stddev > 0.0)) {
    throw std::invalid_argument("law.stddev must be positive");
  }
}

void DatasetSpec::validate() const {
  if (n_sequences < 1) throw std::invalid_argument("n_sequences must be >= 1");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  switch (kind) {
    case ProcessKind::hawkes1:
    case ProcessKind::hawkes2: {
      if (!(hawkes_mu > 0.0)) throw std::invalid_argument("hawkes.mu must be positive");
      double branching = 0.0;
      for (const auto& e : excitations) {
        if (!(e.a >= 0.0) || !(e.b > 0.0)) throw std::invalid_argument("hawkes.excitations need a >= 0, b > 0");
        branching += e.a / e.b;
      }
      if (!(branching < 1.0)) throw std::invalid_argument("hawkes.excitations: sum a/b must be < 1 (stationarity)");
      break;
    }
    case ProcessKind::self_correcting:
      if (!(sc_mu > 0.0)) throw std::invalid_argument("self_correcting.mu must be positive");
      if (!(sc_alpha > 0.0)) throw std::invalid_argument("self_correcting.alpha must be positive");
      break;
    case ProcessKind::ipp:
      intensity.validate();
      break;
    case ProcessKind::renewal:
      law.validate();
      break;
    case ProcessKind::mod_renewal:
      law.validate();
      intensity.validate();
      break;
  }
}

DatasetSpec default_spec(ProcessKind kind) {
  DatasetSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ProcessKind::hawkes1:
      spec.hawkes_mu = 0.2;
      spec.excitations = {{0.8, 1.0}};
      break;
    case ProcessKind::hawkes2:
      // Branching 0.4 per term: a_k / b_k = 0.4.
      spec.hawkes_mu = 0.2;
      spec.excitations = {{0.4, 1.0}, {8.0, 20.0}};
      break;
    case ProcessKind::self_correcting:
      spec.sc_mu = 1.0;
      spec.sc_alpha = 1.0;
      break;
    case ProcessKind::ipp:
      spec.intensity = {1.0, 0.99, 100.0};
      break;
    case ProcessKind::renewal:
      spec.law = {InterEventLaw::Kind::lognormal, 1.0, 6.0};
      break;
    case ProcessKind::mod_renewal:
      spec.law = {InterEventLaw::Kind::lognormal, 1.0, 0.5};
      spec.intensity = {1.0, 0.99, 100.0};
      break;
  }
  return spec;
}

double reference_mean_length(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::hawkes1: return 95.4;
    case ProcessKind::hawkes2: return 97.2;
    case ProcessKind::self_correcting: return 100.2;
    case ProcessKind::ipp: return 100.3;
    case ProcessKind::renewal: return 109.2;
    case ProcessKind::mod_renewal: return 98.0;
  }
  return 0.0;
}

EventSequence gen_hawkes(double mu, std::span<const Excitation> excitations, double t_max, RngStream& rng) {
  double branching = 0.0;
  for (const auto& e : excitations) {
    if (!(e.a >= 0.0) || !(e.b > 0.0)) throw std::invalid_argument("gen_hawkes: need a >= 0 and b > 0");
    branching += e.a / e.b;
  }
  if (!(branching < 1.0)) throw std::invalid_argument("gen_hawkes: nonstationary, sum a/b >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("gen_hawkes: mu must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("gen_hawkes: t_max must be positive");

  std::vector<double> excitation_state(excitations.size(), 0.0);
  std::vector<double> times;
  double t = 0.0;
  for (;;) {
    // Intensity only decays between events, so its current value dominates.
    double bound = mu;
    for (double s : excitation_state) bound += s;
    std::exponential_distribution<double> wait(bound);
    const double dt = wait(rng);
    t += dt;
    if (t > t_max) break;
    double lambda = mu;
    for (std::size_t k = 0; k < excitations.size(); ++k) {
      excitation_state[k] *= std::exp(-excitations[k].b * dt);
      lambda += excitation_state[k];
    }
    assert(lambda <= bound * (1.0 + 1e-12));
    if (rng.uniform() * bound < lambda) {
      times.push_back(t);
      for (std::size_t k = 0; k < excitations.size(); ++k) excitation_state[k] += excitations[k].a;
    }
  }
  return {std::move(times), t_max};
}

EventSequence gen_self_correcting(double mu, double alpha, double t_max, RngStream& rng) {
  if (!(mu > 0.0)) throw std::invalid_argument("gen_self_correcting: mu must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("gen_self_correcting: alpha must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("gen_self_correcting: t_max must be positive");
  std::vector<double> times;
  double t = 0.0;
  double count = 0.0;
  const double segment = 1.0 / mu;
  while (t < t_max) {
    // Intensity grows within a segment, so the value at its right end dominates.
    const double seg_end = std::min(t + segment, t_max);
    const double bound = std::exp(mu * seg_end - alpha * count);
    std::exponential_distribution<double> wait(bound);
    const double candidate = t + wait(rng);
    if (candidate > seg_end) {
      t = seg_end;
      continue;
    }
    t = candidate;
    const double lambda = std::exp(mu * t - alpha * count);
    assert(lambda <= bound * (1.0 + 1e-12));
    if (rng.uniform() * bound < lambda) {
      times.push_back(t);
      count += 1.0;
    }
  }
  return {std::move(times), t_max};
}

EventSequence gen_ipp(const SinusoidalIntensity& intensity, double t_max, RngStream& rng) {
  intensity.validate();
  if (!(t_max > 0.0)) throw std::invalid_argument("gen_ipp: t_max must be positive");
  const double bound = intensity.supremum();
  std::poisson_distribution<long> count_dist(bound * t_max);
  const long count = count_dist(rng);
  std::vector<double> times;
  for (long i = 0; i < count; ++i) {
    const double t = t_max * rng.uniform_pos();
    const double lambda = intensity(t);
    assert(lambda <= bound * (1.0 + 1e-12));
    if (rng.uniform() * bound < lambda) times.push_back(t);
  }
  return EventSequence::from_unsorted(std::move(times), t_max);
}

EventSequence gen_renewal(const InterEventLaw& law, double t_max, RngStream& rng) {
  law.validate();
  if (!(t_max > 0.0)) throw std::invalid_argument("gen_renewal: t_max must be positive");
  std::vector<double> times;
  double t = 0.0;
  for (;;) {
    t += law.sample(rng);
    if (t > t_max) break;
    if (t > 0.0 && (times.empty() || t > times.back())) times.push_back(t);
  }
  return {std::move(times), t_max};
}

EventSequence gen_mod_renewal(const InterEventLaw& law, const SinusoidalIntensity& modulation, double t_max,
                              RngStream& rng) {
  modulation.validate();
  const double horizon = modulation.cumulative(t_max);
  const auto operational = gen_renewal(law, horizon, rng);
  std::vector<double> times;
  times.reserve(operational.size());
  for (double s : operational.times()) {
    const double t = modulation.inverse_cumulative(s, t_max);
    if (t > 0.0 && (times.empty() || t > times.back())) times.push_back(std::min(t, t_max));
  }
  return {std::move(times), t_max};
}

EventSequence generate_one(const DatasetSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case ProcessKind::hawkes1:
    case ProcessKind::hawkes2:
      return gen_hawkes(spec.hawkes_mu, spec.excitations, spec.t_max, rng);
    case ProcessKind::self_correcting:
      return gen_self_correcting(spec.sc_mu, spec.sc_alpha, spec.t_max, rng);
    case ProcessKind::ipp:
      return gen_ipp(spec.intensity, spec.t_max, rng);
    case ProcessKind::renewal:
      return gen_renewal(spec.law, spec.t_max, rng);
    case ProcessKind::mod_renewal:
      return gen_mod_renewal(spec.law, spec.intensity, spec.t_max, rng);
  }
  throw std::invalid_argument("generate_one: unknown process");
}

std::vector<EventSequence> generate(const DatasetSpec& spec) {
  spec.validate();
  const RngStream root(spec.seed, 0);
  std::vector<EventSequence> out;
  out.reserve(static_cast<std::size_t>(spec.n_sequences));
  for (int i = 0; i < spec.n_sequences; ++i) {
    auto rng = root.substream(static_cast<std::uint64_t>(i));
    out.push_back(generate_one(spec, rng));
  }
  return out;
}

SplitIndices make_splits(std::size_t n, std::array<double, 3> ratios, RngStream& rng) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0.0 || ratios[1] < 0.0 || ratios[2] < 0.0) {
    throw std::invalid_argument("make_splits: ratios must be nonnegative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n))));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));
  SplitIndices idx;
  idx.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  idx.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  idx.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* part : {&idx.train, &idx.val, &idx.test}) std::sort(part->begin(), part->end());
  return idx;
}

DatasetSplits apply_splits(const std::vector<EventSequence>& sequences, const SplitIndices& idx) {
  DatasetSplits out;
  for (auto i : idx.train) out.train.push_back(sequences.at(i));
  for (auto i : idx.val) out.val.push_back(sequences.at(i));
  for (auto i : idx.test) out.test.push_back(sequences.at(i));
  return out;
}

DatasetSplits make_splits(const std::vector<EventSequence>& sequences, std::array<double, 3> ratios, RngStream& rng) {
  return apply_splits(sequences, make_splits(sequences.size(), ratios, rng));
}

}  // namespace addthin
