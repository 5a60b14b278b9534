#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "addthin/dataset_io.hpp"
#include "addthin/datagen.hpp"
#include "addthin/errors.hpp"
#include "addthin/eval.hpp"
#include "addthin/sampling.hpp"
#include "addthin/trainer.hpp"

namespace {

using namespace addthin;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitVersion = 3;
constexpr int kExitNumerical = 4;

constexpr std::uint64_t kSplitStream = 21;
constexpr std::uint64_t kSampleStream = 22;
constexpr std::uint64_t kForecastStream = 23;

std::vector<EventSequence> select(const std::vector<EventSequence>& all, const std::vector<std::size_t>& idx) {
  std::vector<EventSequence> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    if (i >= all.size()) throw std::invalid_argument("split manifest index out of range for dataset");
    out.push_back(all[i]);
  }
  return out;
}

const std::vector<std::size_t>& split_indices(const SplitManifest& m, const std::string& split) {
  if (split == "train") return m.indices.train;
  if (split == "val") return m.indices.val;
  if (split == "test") return m.indices.test;
  throw std::invalid_argument("unknown split '" + split + "' (expected train, val or test)");
}

std::string default_manifest(const std::string& dataset) { return dataset + ".split.json"; }

struct GenerateArgs {
  std::string spec;
  std::string out;
  std::string manifest;
};

void cmd_generate(const GenerateArgs& a) {
  const auto text = read_text_file(a.spec);
  const auto spec = dataset_spec_from_json(text);
  const auto ratios = split_ratios_from_json(text);
  const auto sequences = generate(spec);
  write_jsonl_file(a.out, sequences);

  RngStream split_rng(spec.seed, kSplitStream);
  SplitManifest manifest;
  manifest.dataset = a.out;
  manifest.seed = spec.seed;
  manifest.ratios = ratios;
  manifest.indices = make_splits(sequences.size(), ratios, split_rng);
  manifest.generator = dataset_spec_to_json(spec);
  const auto manifest_path = a.manifest.empty() ? default_manifest(a.out) : a.manifest;
  write_text_file(manifest_path, manifest_to_json(manifest));

  double total = 0.0;
  for (const auto& s : sequences) total += static_cast<double>(s.size());
  std::cout << "generated " << sequences.size() << " " << to_string(spec.kind) << " sequences, mean length "
            << total / static_cast<double>(sequences.size()) << "\n";
}

struct TrainArgs {
  std::string data;
  std::string manifest;
  std::string config;
  std::string out;
  std::string log;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_epochs;
};

void cmd_train(const TrainArgs& a) {
  auto config = a.config.empty() ? TrainConfig{} : train_config_from_json(read_text_file(a.config));
  if (a.seed) config.seed = *a.seed;
  if (a.max_epochs) config.max_epochs = *a.max_epochs;
  config.validate();
  const auto all = read_jsonl_file(a.data);
  const auto manifest = manifest_from_json(read_text_file(a.manifest.empty() ? default_manifest(a.data) : a.manifest));
  const auto train_split = select(all, manifest.indices.train);
  const auto val_split = select(all, manifest.indices.val);

  std::ostringstream log;
  const auto ckpt = train(train_split, val_split, config, [&](const MetricRecord& r) {
    nlohmann::json rec;
    rec["epoch"] = r.epoch;
    rec["train_loss"] = r.train_loss;
    rec["validation"] = r.validation;
    log << rec.dump() << "\n";
    std::cerr << "epoch " << r.epoch << "  loss " << r.train_loss << "  validation " << r.validation << "\n";
  });
  save_checkpoint(ckpt, a.out);
  if (!a.log.empty()) write_text_file(a.log, log.str());
  std::cout << "best epoch " << ckpt.best_epoch << ", checkpoint written to " << a.out << "\n";
}

struct SampleArgs {
  std::string checkpoint;
  std::string out;
  int count = 4000;
  std::uint64_t seed = 0;
};

void cmd_sample(const SampleArgs& a) {
  if (a.count < 1) throw std::invalid_argument("--count must be >= 1");
  const auto ckpt = load_checkpoint(a.checkpoint);
  const auto model = ckpt.denoiser();
  RngStream rng(a.seed, kSampleStream);
  const auto samples = draw_samples(model, ckpt.schedule, a.count, ckpt.data_t_max, rng);
  write_jsonl_file(a.out, samples);
  std::cout << "wrote " << samples.size() << " samples to " << a.out << "\n";
}

struct ForecastArgs {
  std::string checkpoint;
  std::string data;
  std::string manifest;
  std::string split = "test";
  std::string out;
  std::string baseline;
  int windows = 50;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

void cmd_forecast(const ForecastArgs& a) {
  if (a.windows < 1) throw std::invalid_argument("--windows must be >= 1");
  if (!a.baseline.empty() && a.baseline != "hpp") throw std::invalid_argument("--baseline accepts only 'hpp'");
  const bool use_baseline = !a.baseline.empty();
  std::optional<Checkpoint> ckpt;
  std::optional<Denoiser> model;
  double horizon = a.horizon;
  if (!use_baseline) {
    if (a.checkpoint.empty()) throw std::invalid_argument("--checkpoint is required unless --baseline is given");
    ckpt = load_checkpoint(a.checkpoint);
    if (!ckpt->model.conditional) throw UnsupportedOperation("forecast: checkpoint holds an unconditional model");
    model.emplace(ckpt->denoiser());
    if (horizon <= 0.0) horizon = ckpt->train.horizon;
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("--horizon must be positive");

  const auto all = read_jsonl_file(a.data);
  const auto manifest = manifest_from_json(read_text_file(a.manifest.empty() ? default_manifest(a.data) : a.manifest));
  const auto& indices = split_indices(manifest, a.split);
  if (ckpt) {
    for (auto i : indices) {
      if (i < all.size() && all[i].t_max() != ckpt->data_t_max) {
        throw std::invalid_argument("forecast: dataset t_max differs from the checkpoint's training data");
      }
    }
  }

  const RngStream root(a.seed, kForecastStream);
  std::ofstream out(a.out, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + a.out + " for writing");
  std::size_t written = 0;
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const auto index = indices[pos];
    if (index >= all.size()) throw std::invalid_argument("split manifest index out of range for dataset");
    const auto& seq = all[index];
    const auto seq_rng = root.substream(pos);
    for (int w = 0; w < a.windows; ++w) {
      auto window_rng = seq_rng.substream(static_cast<std::uint64_t>(w));
      const double start = draw_window_start(seq.t_max(), horizon, window_rng);
      const auto example = split_window(seq, start, horizon);
      const auto pred = use_baseline ? hpp_baseline_forecast(example.history, {start, start + horizon}, window_rng)
                                     : forecast(*model, ckpt->schedule, example.history, horizon, window_rng);
      nlohmann::json rec;
      rec["sequence"] = index;
      rec["window_start"] = start;
      rec["window_end"] = start + horizon;
      rec["arrival_times"] = pred.values();
      out << rec.dump() << "\n";
      ++written;
    }
  }
  if (!out) throw std::runtime_error("write failed: " + a.out);
  std::cout << "wrote " << written << " forecasts to " << a.out << "\n";
}

struct EvalArgs {
  std::string mode = "density";
  std::string input;
  std::string reference;
  std::string manifest;
  std::string split = "test";
  std::string out;
  std::uint64_t seed = 0;
};

struct ForecastRecord {
  std::size_t sequence = 0;
  Window window;
  std::vector<double> times;
};

std::vector<ForecastRecord> read_forecasts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<ForecastRecord> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw std::invalid_argument(where + ": malformed JSON");
    }
    try {
      ForecastRecord r;
      r.sequence = rec.at("sequence").get<std::size_t>();
      r.window = {rec.at("window_start").get<double>(), rec.at("window_end").get<double>()};
      r.times = rec.at("arrival_times").get<std::vector<double>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(where + ": bad forecast record (" + e.what() + ")");
    }
  }
  return out;
}

void print_table(const std::vector<MetricRecordOut>& records) {
  std::cout << std::left << std::setw(24) << "metric" << std::right << std::setw(14) << "value" << std::setw(12)
            << "n_samples" << std::setw(14) << "bandwidth" << "\n";
  for (const auto& r : records) {
    std::cout << std::left << std::setw(24) << r.metric << std::right << std::setw(14) << std::setprecision(6)
              << r.value << std::setw(12) << r.n_samples << std::setw(14);
    if (r.bandwidth) {
      std::cout << *r.bandwidth;
    } else {
      std::cout << "-";
    }
    std::cout << "\n";
  }
}

void cmd_eval(const EvalArgs& a) {
  const auto reference_all = read_jsonl_file(a.reference);
  std::vector<MetricRecordOut> records;
  if (a.mode == "density") {
    std::vector<EventSequence> reference = reference_all;
    const auto manifest_path = a.manifest.empty() ? default_manifest(a.reference) : a.manifest;
    if (!a.manifest.empty() || std::ifstream(manifest_path)) {
      reference = select(reference_all, split_indices(manifest_from_json(read_text_file(manifest_path)), a.split));
    }
    const auto samples = read_jsonl_file(a.input);
    if (samples.empty() || reference.empty()) throw std::invalid_argument("eval: empty sample or reference set");
    const double t_max = reference.front().t_max();
    const auto mismatched = [t_max](const EventSequence& s) { return s.t_max() != t_max; };
    if (std::any_of(samples.begin(), samples.end(), mismatched) ||
        std::any_of(reference.begin(), reference.end(), mismatched)) {
      throw std::invalid_argument("eval: t_max mismatch between samples and reference");
    }
    const auto m = mmd(samples, reference);
    const auto n = static_cast<long>(samples.size());
    records.push_back({"mmd", m.value, n, a.seed, m.bandwidth});
    records.push_back({"count_wasserstein", count_wasserstein(samples, reference, true), n, a.seed, std::nullopt});
    double mean_len = 0.0;
    for (const auto& s : samples) mean_len += static_cast<double>(s.size());
    records.push_back({"mean_length", mean_len / static_cast<double>(n), n, a.seed, std::nullopt});
  } else if (a.mode == "forecast") {
    const auto forecasts = read_forecasts(a.input);
    if (forecasts.empty()) throw std::invalid_argument("eval: no forecast records");
    double total_w = 0.0;
    double total_mape = 0.0;
    for (const auto& f : forecasts) {
      if (f.sequence >= reference_all.size()) throw std::invalid_argument("eval: forecast refers to a missing sequence");
      const auto& seq = reference_all[f.sequence];
      if (f.window.end > seq.t_max() * (1.0 + 1e-12)) throw std::invalid_argument("eval: window exceeds t_max");
      const auto truth = seq.between(f.window.start, f.window.end);
      total_w += forecast_wasserstein(f.times, truth, f.window);
      total_mape += count_mape(static_cast<long>(f.times.size()), static_cast<long>(truth.size()));
    }
    const auto n = static_cast<long>(forecasts.size());
    records.push_back({"forecast_wasserstein", total_w / static_cast<double>(n), n, a.seed, std::nullopt});
    records.push_back({"count_mape", total_mape / static_cast<double>(n), n, a.seed, std::nullopt});
  } else {
    throw std::invalid_argument("--mode must be 'density' or 'forecast'");
  }
  std::ostringstream report;
  for (const auto& r : records) report << to_json_record(r) << "\n";
  write_text_file(a.out, report.str());
  print_table(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Add-and-thin diffusion for temporal point processes"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Simulate a synthetic dataset and its split manifest");
  generate_cmd->add_option("--spec", gen.spec, "Dataset spec (flat JSON)")->required();
  generate_cmd->add_option("--out", gen.out, "Output JSONL dataset")->required();
  generate_cmd->add_option("--manifest", gen.manifest, "Split manifest path (default <out>.split.json)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a denoiser");
  train_cmd->add_option("--data", tr.data, "JSONL dataset")->required();
  train_cmd->add_option("--manifest", tr.manifest, "Split manifest (default <data>.split.json)");
  train_cmd->add_option("--config", tr.config, "Training config (flat JSON)");
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_option("--log", tr.log, "Validation history (JSONL)");
  train_cmd->add_option("--seed", tr.seed, "Override the config seed");
  train_cmd->add_option("--max-epochs", tr.max_epochs, "Override the config epoch budget");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Draw unconditional samples");
  sample_cmd->add_option("--checkpoint", sa.checkpoint, "Checkpoint path")->required();
  sample_cmd->add_option("--out", sa.out, "Output JSONL samples")->required();
  sample_cmd->add_option("--count", sa.count, "Number of sequences")->capture_default_str();
  sample_cmd->add_option("--seed", sa.seed, "Random seed")->capture_default_str();

  ForecastArgs fa;
  auto* forecast_cmd = app.add_subcommand("forecast", "Forecast random windows of a dataset split");
  forecast_cmd->add_option("--checkpoint", fa.checkpoint, "Conditional checkpoint");
  forecast_cmd->add_option("--data", fa.data, "JSONL dataset")->required();
  forecast_cmd->add_option("--manifest", fa.manifest, "Split manifest (default <data>.split.json)");
  forecast_cmd->add_option("--split", fa.split, "Split to forecast")->capture_default_str();
  forecast_cmd->add_option("--out", fa.out, "Output JSONL forecasts")->required();
  forecast_cmd->add_option("--windows", fa.windows, "Windows per sequence")->capture_default_str();
  forecast_cmd->add_option("--horizon", fa.horizon, "Window length (default: from checkpoint)");
  forecast_cmd->add_option("--baseline", fa.baseline, "Use a baseline instead of a model: hpp");
  forecast_cmd->add_option("--seed", fa.seed, "Random seed")->capture_default_str();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Compute metrics against a reference dataset");
  eval_cmd->add_option("--mode", ea.mode, "density or forecast")->capture_default_str();
  eval_cmd->add_option("--input", ea.input, "Samples or forecasts (JSONL)")->required();
  eval_cmd->add_option("--reference", ea.reference, "Reference JSONL dataset")->required();
  eval_cmd->add_option("--manifest", ea.manifest, "Split manifest (default <reference>.split.json if present)");
  eval_cmd->add_option("--split", ea.split, "Reference split for density mode")->capture_default_str();
  eval_cmd->add_option("--out", ea.out, "Metrics report (JSONL)")->required();
  eval_cmd->add_option("--seed", ea.seed, "Seed recorded in the report")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*generate_cmd) cmd_generate(gen);
    if (*train_cmd) cmd_train(tr);
    if (*sample_cmd) cmd_sample(sa);
    if (*forecast_cmd) cmd_forecast(fa);
    if (*eval_cmd) cmd_eval(ea);
  } catch (const VersionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVersion;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
