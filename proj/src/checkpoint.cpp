#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "addthin/binary_io.hpp"
#include "addthin/errors.hpp"
#include "addthin/trainer.hpp"

namespace addthin {
namespace {

constexpr char kMagic[4] = {'A', 'T', 'C', 'K'};

std::uint64_t to_u64(int v) {
  if (v < 0) throw std::invalid_argument("checkpoint: negative integer field");
  return static_cast<std::uint64_t>(v);
}

int to_int(std::uint64_t v) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw std::runtime_error("checkpoint: integer field out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  using namespace binary;
  out.write(kMagic, 4);
  write_u32(out, kCheckpointVersion);

  const auto& tc = ckpt.train;
  write_f64(out, tc.learning_rate);
  write_u64(out, to_u64(tc.batch_size));
  write_u64(out, to_u64(tc.max_epochs));
  write_u64(out, to_u64(tc.patience));
  write_u64(out, to_u64(tc.validation_samples));
  write_u64(out, to_u64(tc.validation_interval));
  write_u64(out, to_u64(tc.n_steps));
  write_u64(out, to_u64(tc.n_components));
  write_u64(out, to_u64(tc.hidden_dim));
  write_u64(out, tc.seed);
  write_u32(out, tc.conditional ? 1 : 0);
  write_f64(out, tc.horizon);
  write_f64(out, tc.hpp_rate);
  write_f64(out, tc.ema_decay);

  const auto& s = ckpt.schedule;
  write_u64(out, to_u64(s.n_steps));
  write_f64(out, s.cosine_offset);
  write_f64(out, s.lambda_hpp);
  write_u64(out, s.alpha_bar.size());
  for (double v : s.alpha_bar) write_f64(out, v);
  for (double v : s.alpha) write_f64(out, v);

  const auto& mc = ckpt.model;
  write_u64(out, to_u64(mc.hidden_dim));
  write_u64(out, to_u64(mc.n_components));
  write_u64(out, to_u64(mc.n_steps));
  write_u32(out, mc.conditional ? 1 : 0);
  write_f64(out, mc.embed_scale);
  write_f64(out, mc.max_period);
  write_f64(out, mc.sigma_floor);

  write_f64(out, ckpt.data_t_max);
  write_u64(out, to_u64(ckpt.best_epoch));
  write_u64(out, ckpt.history.size());
  for (const auto& r : ckpt.history) {
    write_u64(out, to_u64(r.epoch));
    write_f64(out, r.train_loss);
    write_f64(out, r.validation);
  }
  ckpt.params.serialize(out);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  save_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint(std::istream& in) {
  using namespace binary;
  char magic[4];
  read_exact(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("checkpoint: not a checkpoint file (bad magic)");
  const auto version = read_u32(in);
  if (version != kCheckpointVersion) throw VersionMismatch("checkpoint", version, kCheckpointVersion);

  Checkpoint ckpt;
  auto& tc = ckpt.train;
  tc.learning_rate = read_f64(in);
  tc.batch_size = to_int(read_u64(in));
  tc.max_epochs = to_int(read_u64(in));
  tc.patience = to_int(read_u64(in));
  tc.validation_samples = to_int(read_u64(in));
  tc.validation_interval = to_int(read_u64(in));
  tc.n_steps = to_int(read_u64(in));
  tc.n_components = to_int(read_u64(in));
  tc.hidden_dim = to_int(read_u64(in));
  tc.seed = read_u64(in);
  tc.conditional = read_u32(in) != 0;
  tc.horizon = read_f64(in);
  tc.hpp_rate = read_f64(in);
  tc.ema_decay = read_f64(in);

  const int n_steps = to_int(read_u64(in));
  const double offset = read_f64(in);
  const double lambda_hpp = read_f64(in);
  const auto n_alpha = read_u64(in);
  if (n_alpha != static_cast<std::uint64_t>(n_steps) + 1) throw std::runtime_error("checkpoint: schedule length mismatch");
  std::vector<double> alpha_bar(n_alpha);
  for (auto& v : alpha_bar) v = read_f64(in);
  ckpt.schedule = NoiseSchedule::from_alpha_bar(std::move(alpha_bar), lambda_hpp);
  ckpt.schedule.cosine_offset = offset;
  for (auto& v : ckpt.schedule.alpha) v = read_f64(in);

  auto& mc = ckpt.model;
  mc.hidden_dim = to_int(read_u64(in));
  mc.n_components = to_int(read_u64(in));
  mc.n_steps = to_int(read_u64(in));
  mc.conditional = read_u32(in) != 0;
  mc.embed_scale = read_f64(in);
  mc.max_period = read_f64(in);
  mc.sigma_floor = read_f64(in);

  ckpt.data_t_max = read_f64(in);
  ckpt.best_epoch = to_int(read_u64(in));
  const auto n_records = read_u64(in);
  if (n_records > (1u << 24)) throw std::runtime_error("checkpoint: implausible metric history length");
  ckpt.history.resize(n_records);
  for (auto& r : ckpt.history) {
    r.epoch = to_int(read_u64(in));
    r.train_loss = read_f64(in);
    r.validation = read_f64(in);
  }
  ckpt.params = nn::ParameterSet::deserialize(in);
  // Validates the parameter layout against the model configuration.
  (void)ckpt.denoiser();
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("checkpoint: cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace addthin
