#include <doctest.h>

#include <cmath>
#include <sstream>

#include "addthin/errors.hpp"
#include "addthin/eval.hpp"
#include "addthin/tpp.hpp"
#include "addthin/trainer.hpp"

using namespace addthin;

namespace {

std::vector<EventSequence> hpp_sequences(int count, double t_max, RngStream& rng) {
  std::vector<EventSequence> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_hpp(1.0, t_max, rng));
  return out;
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.hidden_dim = 8;
  c.n_components = 4;
  c.n_steps = 20;
  c.batch_size = 8;
  c.max_epochs = 3;
  c.validation_samples = 8;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("adam matches a hand-computed update") {
  std::vector<double> params{1.0, -2.0, 0.5};
  const std::vector<double> g1{0.3, -4.0, 0.0};
  AdamState state;
  adam_step(params, g1, state, 0.1);
  CHECK(state.step == 1);
  CHECK(params[0] == doctest::Approx(1.0 - 0.1 * 0.3 / (0.3 + 1e-8)).epsilon(1e-15));
  CHECK(params[1] == doctest::Approx(-2.0 + 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-15));
  CHECK(params[2] == 0.5);

  const double after_first = params[0];
  const std::vector<double> g2{-0.1, 1.0, 2.0};
  adam_step(params, g2, state, 0.1);
  const double m = 0.9 * 0.1 * 0.3 + 0.1 * -0.1;
  const double v = 0.999 * 0.001 * 0.09 + 0.001 * 0.01;
  const double m_hat = m / (1.0 - 0.81);
  const double v_hat = v / (1.0 - 0.999 * 0.999);
  CHECK(params[0] == doctest::Approx(after_first - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8)).epsilon(1e-12));
  const double m2 = 0.1 * 2.0 / (1.0 - 0.81);
  const double v2 = 0.001 * 4.0 / (1.0 - 0.999 * 0.999);
  CHECK(params[2] == doctest::Approx(0.5 - 0.1 * m2 / (std::sqrt(v2) + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam with zero gradients") {
  std::vector<double> params{1.0, 2.0};
  AdamState state;
  adam_step(params, std::vector<double>{0.0, 0.0}, state, 0.01);
  CHECK(params == std::vector<double>{1.0, 2.0});

  adam_step(params, std::vector<double>{1.0, -1.0}, state, 0.01);
  const auto m = state.m;
  const auto v = state.v;
  const auto before = params;
  adam_step(params, std::vector<double>{0.0, 0.0}, state, 0.0);
  CHECK(params == before);
  CHECK(state.m[0] == doctest::Approx(0.9 * m[0]));
  CHECK(state.v[1] == doctest::Approx(0.999 * v[1]));

  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(adam_step(params, wrong, state, 0.01), std::logic_error);
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    std::vector<double> params(10, 0.5);
    AdamState state;
    RngStream rng(3, 3);
    for (int step = 0; step < 100; ++step) {
      std::vector<double> g(params.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = params[i] - rng.uniform();
      adam_step(params, g, state, 1e-2);
    }
    return params;
  };
  CHECK(run() == run());
}

TEST_CASE("early stopping") {
  const std::vector<double> improving{5.0, 4.0, 3.0, 2.0, 1.0};
  for (std::size_t k = 1; k <= improving.size(); ++k) {
    CHECK_FALSE(early_stop(std::span(improving).first(k), 2));
  }
  const std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK_FALSE(early_stop(std::span(flat).first(2), 2));
  CHECK(early_stop(flat, 2));

  const std::vector<double> noisy{3.0, 2.0, 2.5, 2.4, 1.5, 1.9, 1.8};
  CHECK_FALSE(early_stop(std::span(noisy).first(4), 3));
  CHECK_FALSE(early_stop(noisy, 3));
  CHECK(early_stop(noisy, 2));
  CHECK(early_stop(std::span(noisy).first(1), 0));
  CHECK_FALSE(early_stop(std::span<const double>{}, 0));
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(TrainConfig{}.validate());
  auto bad = TrainConfig{};
  bad.learning_rate = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("learning_rate"), std::invalid_argument);
  bad = TrainConfig{};
  bad.hidden_dim = 7;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("hidden_dim"), std::invalid_argument);
  bad = TrainConfig{};
  bad.hpp_rate = -1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("hpp_rate"), std::invalid_argument);
  bad = TrainConfig{};
  bad.ema_decay = 1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("ema_decay"), std::invalid_argument);
}

TEST_CASE("windows") {
  const EventSequence seq({1.0, 4.0, 10.0, 12.0, 19.5}, 20.0);
  const auto w = split_window(seq, 10.0, 5.0);
  CHECK(w.history == EventSequence({1.0, 4.0, 10.0}, 10.0));
  CHECK(w.truth == EventSequence({12.0}, 15.0));
  CHECK_THROWS_AS(split_window(seq, 18.0, 5.0), std::invalid_argument);
  RngStream rng(4, 0);
  for (int i = 0; i < 1000; ++i) {
    const double s = draw_window_start(100.0, 10.0, rng);
    CHECK(s >= 10.0);
    CHECK(s <= 90.0);
  }
  CHECK_THROWS_AS(draw_window_start(15.0, 10.0, rng), std::invalid_argument);
}

TEST_CASE("loss decreases on a fixed batch") {
  Denoiser model(tiny_config().model_config(), 6);
  const auto sched = cosine_schedule(20, 30.0);
  RngStream rng(6, 0);
  std::vector<EventSequence> clean;
  std::vector<NoisySequence> noisy;
  std::vector<int> steps;
  for (int i = 0; i < 16; ++i) {
    clean.push_back(rescale(sample_hpp(1.0, 30.0, rng), 1.0));
    steps.push_back(1 + static_cast<int>(rng.uniform() * 20.0));
    noisy.push_back(corrupt(clean.back(), steps.back(), sched, rng));
  }
  auto batch_loss = [&](std::vector<double>* grad) {
    double total = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      std::vector<double> g(grad ? grad->size() : 0, 0.0);
      total += model.loss_given(clean[i], noisy[i], steps[i], nullptr, g).total;
      if (grad) {
        for (std::size_t k = 0; k < g.size(); ++k) (*grad)[k] += g[k] / clean.size();
      }
    }
    return total / clean.size();
  };
  const double initial = batch_loss(nullptr);
  AdamState state;
  for (int step = 0; step < 100; ++step) {
    std::vector<double> grad(model.params().size(), 0.0);
    batch_loss(&grad);
    adam_step(model.params().values(), grad, state, 1e-3);
  }
  const double final_loss = batch_loss(nullptr);
  CHECK(std::isfinite(final_loss));
  CHECK(final_loss < initial);
}

TEST_CASE("training contract") {
  RngStream rng(7, 0);
  const auto train_split = hpp_sequences(16, 10.0, rng);
  const auto val_split = hpp_sequences(8, 10.0, rng);
  CHECK_THROWS_AS(train({}, val_split, tiny_config()), std::invalid_argument);
  CHECK_THROWS_AS(train(train_split, {}, tiny_config()), std::invalid_argument);

  auto config = tiny_config();
  config.patience = 0;
  config.max_epochs = 10;
  const auto stopped = train(train_split, val_split, config);
  CHECK(stopped.history.size() == 1);
  CHECK(stopped.best_epoch == 1);

  config = tiny_config();
  std::vector<MetricRecord> logged;
  const auto a = train(train_split, val_split, config, [&](const MetricRecord& r) { logged.push_back(r); });
  const auto b = train(train_split, val_split, config);
  CHECK(logged.size() == 3);
  for (const auto& r : logged) CHECK(std::isfinite(r.train_loss));
  CHECK(a.params.values()[0] == b.params.values()[0]);
  CHECK(std::equal(a.params.values().begin(), a.params.values().end(), b.params.values().begin()));
  CHECK(a.data_t_max == 10.0);
  CHECK(a.schedule.lambda_hpp == doctest::Approx(10.0));

  std::vector<EventSequence> mixed = train_split;
  mixed.push_back(EventSequence(11.0));
  CHECK_THROWS_AS(train(mixed, val_split, config), std::invalid_argument);

  config.conditional = true;
  config.horizon = 3.0;
  const auto cond = train(train_split, val_split, config);
  CHECK(cond.model.conditional);
  CHECK(cond.schedule.lambda_hpp == doctest::Approx(3.0));
  for (const auto& r : cond.history) CHECK(std::isfinite(r.validation));
  config.horizon = 6.0;
  CHECK_THROWS_AS(train(train_split, val_split, config), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
  RngStream rng(8, 0);
  const auto train_split = hpp_sequences(16, 10.0, rng);
  const auto val_split = hpp_sequences(8, 10.0, rng);
  const auto ckpt = train(train_split, val_split, tiny_config());

  std::stringstream buffer;
  save_checkpoint(ckpt, buffer);
  const std::string bytes = buffer.str();
  std::stringstream in(bytes);
  const auto loaded = load_checkpoint(in);
  CHECK(loaded.train == ckpt.train);
  CHECK(loaded.model == ckpt.model);
  CHECK(loaded.schedule.alpha_bar == ckpt.schedule.alpha_bar);
  CHECK(loaded.schedule.lambda_hpp == ckpt.schedule.lambda_hpp);
  CHECK(loaded.best_epoch == ckpt.best_epoch);
  REQUIRE(loaded.history.size() == ckpt.history.size());
  CHECK(loaded.history.back().validation == ckpt.history.back().validation);
  CHECK(std::equal(loaded.params.values().begin(), loaded.params.values().end(), ckpt.params.values().begin()));

  RngStream ra(8, 1);
  RngStream rb(8, 1);
  const auto sa = draw_samples(ckpt.denoiser(), ckpt.schedule, 10, 10.0, ra);
  const auto sb = draw_samples(loaded.denoiser(), loaded.schedule, 10, 10.0, rb);
  CHECK(mmd(sa, val_split).value == mmd(sb, val_split).value);

  std::stringstream again;
  save_checkpoint(loaded, again);
  CHECK(again.str() == bytes);

  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  std::stringstream wv(wrong_version);
  CHECK_THROWS_AS(load_checkpoint(wv), VersionMismatch);
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  std::stringstream wm(wrong_magic);
  CHECK_THROWS_AS(load_checkpoint(wm), std::runtime_error);
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(truncated), std::runtime_error);
  CHECK_THROWS(load_checkpoint(std::string("/nonexistent/ckpt.bin")));
}

TEST_CASE("training on a constant-rate process improves validation mmd") {
  RngStream rng(9, 0);
  const auto train_split = hpp_sequences(200, 50.0, rng);
  const auto val_split = hpp_sequences(100, 50.0, rng);
  auto config = tiny_config();
  config.hidden_dim = 16;
  config.n_components = 8;
  config.n_steps = 100;
  config.batch_size = 32;
  config.max_epochs = 60;
  config.validation_interval = 20;
  config.validation_samples = 100;
  config.learning_rate = 1e-2;

  const Denoiser initial(config.model_config(), config.seed);
  RngStream sample_rng(9, 1);
  const auto before = draw_samples(initial, cosine_schedule(100, 50.0), 100, 50.0, sample_rng);
  const double initial_mmd = mmd(before, val_split).value;

  const auto ckpt = train(train_split, val_split, config);
  double best = ckpt.history.front().validation;
  for (const auto& r : ckpt.history) best = std::min(best, r.validation);
  MESSAGE("initial " << initial_mmd << " best " << best);
  CHECK(best <= 0.5 * initial_mmd);
}
