#include "addthin/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace addthin {
namespace {

using nlohmann::json;

json parse_object(const std::string& text, const std::string& what) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(what + ": malformed JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) throw std::invalid_argument(what + ": expected a JSON object");
  return doc;
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& what) {
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw std::invalid_argument(what + ": unknown field '" + key + "'");
  }
}

double get_number(const json& doc, const std::string& key, double fallback, const std::string& what) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number()) throw std::invalid_argument(what + ": field '" + key + "' must be a number");
  return v.get<double>();
}

long get_integer(const json& doc, const std::string& key, long fallback, const std::string& what) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw std::invalid_argument(what + ": field '" + key + "' must be an integer");
  return v.get<long>();
}

std::uint64_t get_seed(const json& doc, const std::string& key, std::uint64_t fallback, const std::string& what) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw std::invalid_argument(what + ": field '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& doc, const std::string& key, bool fallback, const std::string& what) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_boolean()) throw std::invalid_argument(what + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> get_numbers(const json& doc, const std::string& key, const std::string& what) {
  const auto& v = doc.at(key);
  if (!v.is_array()) throw std::invalid_argument(what + ": field '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw std::invalid_argument(what + ": field '" + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

int narrow_int(long v, const std::string& key, const std::string& what) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(what + ": field '" + key + "' out of range");
  }
  return static_cast<int>(v);
}

std::string law_name(InterEventLaw::Kind kind) {
  switch (kind) {
    case InterEventLaw::Kind::lognormal: return "lognormal";
    case InterEventLaw::Kind::exponential: return "exponential";
    case InterEventLaw::Kind::gamma: return "gamma";
    case InterEventLaw::Kind::deterministic: return "deterministic";
  }
  return "lognormal";
}

InterEventLaw::Kind parse_law(const std::string& name, const std::string& what) {
  for (auto kind : {InterEventLaw::Kind::lognormal, InterEventLaw::Kind::exponential, InterEventLaw::Kind::gamma,
                    InterEventLaw::Kind::deterministic}) {
    if (law_name(kind) == name) return kind;
  }
  throw std::invalid_argument(what + ": field 'law' has unknown value '" + name + "'");
}

json indices_json(const std::vector<std::size_t>& idx) { return json(idx); }

std::vector<std::size_t> indices_from(const json& doc, const std::string& key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw std::invalid_argument("split manifest: field '" + key + "' must be an array");
  }
  std::vector<std::size_t> out;
  for (const auto& v : doc.at(key)) {
    if (!v.is_number_unsigned()) throw std::invalid_argument("split manifest: field '" + key + "' holds a non-index");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

std::string to_jsonl_record(const EventSequence& seq) {
  json record;
  record["arrival_times"] = seq.values();
  record["t_max"] = seq.t_max();
  return record.dump();
}

void write_jsonl(std::ostream& out, std::span<const EventSequence> sequences) {
  for (const auto& seq : sequences) out << to_jsonl_record(seq) << '\n';
}

std::vector<EventSequence> read_jsonl(std::istream& in, const std::string& source) {
  std::vector<EventSequence> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    try {
      const auto record = parse_object(line, where);
      reject_unknown(record, {"arrival_times", "t_max"}, where);
      if (!record.contains("t_max")) throw std::invalid_argument(where + ": missing field 't_max'");
      if (!record.contains("arrival_times")) throw std::invalid_argument(where + ": missing field 'arrival_times'");
      const double t_max = get_number(record, "t_max", 0.0, where);
      auto times = get_numbers(record, "arrival_times", where);
      out.emplace_back(std::move(times), t_max);
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      throw std::invalid_argument(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
    }
  }
  return out;
}

std::vector<EventSequence> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset " + path);
  return read_jsonl(in, path);
}

void write_jsonl_file(const std::string& path, std::span<const EventSequence> sequences) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_jsonl(out, sequences);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string manifest_to_json(const SplitManifest& manifest) {
  json doc;
  doc["dataset"] = manifest.dataset;
  doc["seed"] = manifest.seed;
  doc["ratios"] = manifest.ratios;
  doc["train"] = indices_json(manifest.indices.train);
  doc["val"] = indices_json(manifest.indices.val);
  doc["test"] = indices_json(manifest.indices.test);
  doc["generator"] = manifest.generator.empty() ? json(nullptr) : json::parse(manifest.generator);
  return doc.dump(2) + "\n";
}

SplitManifest manifest_from_json(const std::string& text) {
  const std::string what = "split manifest";
  const auto doc = parse_object(text, what);
  SplitManifest m;
  if (doc.contains("dataset") && doc.at("dataset").is_string()) m.dataset = doc.at("dataset").get<std::string>();
  m.seed = get_seed(doc, "seed", 0, what);
  if (doc.contains("ratios")) {
    const auto r = get_numbers(doc, "ratios", what);
    if (r.size() != 3) throw std::invalid_argument(what + ": field 'ratios' must have 3 entries");
    m.ratios = {r[0], r[1], r[2]};
  }
  m.indices.train = indices_from(doc, "train");
  m.indices.val = indices_from(doc, "val");
  m.indices.test = indices_from(doc, "test");
  if (doc.contains("generator") && !doc.at("generator").is_null()) m.generator = doc.at("generator").dump();
  return m;
}

DatasetSpec dataset_spec_from_json(const std::string& text) {
  const std::string what = "dataset spec";
  const auto doc = parse_object(text, what);
  reject_unknown(doc,
                 {"kind", "n_sequences", "t_max", "seed", "hawkes_mu", "hawkes_a", "hawkes_b", "sc_mu", "sc_alpha",
                  "ipp_base", "ipp_amplitude", "ipp_period", "law", "law_mean", "law_stddev", "train_ratio",
                  "val_ratio", "test_ratio"},
                 what);
  if (!doc.contains("kind") || !doc.at("kind").is_string()) {
    throw std::invalid_argument(what + ": field 'kind' must be a string");
  }
  DatasetSpec spec;
  try {
    spec = default_spec(parse_process_kind(doc.at("kind").get<std::string>()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(what + ": field 'kind': " + e.what());
  }
  spec.n_sequences = narrow_int(get_integer(doc, "n_sequences", spec.n_sequences, what), "n_sequences", what);
  spec.t_max = get_number(doc, "t_max", spec.t_max, what);
  spec.seed = get_seed(doc, "seed", spec.seed, what);
  spec.hawkes_mu = get_number(doc, "hawkes_mu", spec.hawkes_mu, what);
  if (doc.contains("hawkes_a") || doc.contains("hawkes_b")) {
    if (!doc.contains("hawkes_a") || !doc.contains("hawkes_b")) {
      throw std::invalid_argument(what + ": fields 'hawkes_a' and 'hawkes_b' must be given together");
    }
    const auto a = get_numbers(doc, "hawkes_a", what);
    const auto b = get_numbers(doc, "hawkes_b", what);
    if (a.size() != b.size()) throw std::invalid_argument(what + ": field 'hawkes_b' length differs from 'hawkes_a'");
    spec.excitations.clear();
    for (std::size_t i = 0; i < a.size(); ++i) spec.excitations.push_back({a[i], b[i]});
  }
  spec.sc_mu = get_number(doc, "sc_mu", spec.sc_mu, what);
  spec.sc_alpha = get_number(doc, "sc_alpha", spec.sc_alpha, what);
  spec.intensity.base = get_number(doc, "ipp_base", spec.intensity.base, what);
  spec.intensity.amplitude = get_number(doc, "ipp_amplitude", spec.intensity.amplitude, what);
  spec.intensity.period = get_number(doc, "ipp_period", spec.intensity.period, what);
  if (doc.contains("law")) {
    if (!doc.at("law").is_string()) throw std::invalid_argument(what + ": field 'law' must be a string");
    spec.law.kind = parse_law(doc.at("law").get<std::string>(), what);
  }
  spec.law.mean = get_number(doc, "law_mean", spec.law.mean, what);
  spec.law.stddev = get_number(doc, "law_stddev", spec.law.stddev, what);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
  return spec;
}

std::string dataset_spec_to_json(const DatasetSpec& spec) {
  json doc;
  doc["kind"] = to_string(spec.kind);
  doc["n_sequences"] = spec.n_sequences;
  doc["t_max"] = spec.t_max;
  doc["seed"] = spec.seed;
  switch (spec.kind) {
    case ProcessKind::hawkes1:
    case ProcessKind::hawkes2: {
      doc["hawkes_mu"] = spec.hawkes_mu;
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& e : spec.excitations) {
        a.push_back(e.a);
        b.push_back(e.b);
      }
      doc["hawkes_a"] = a;
      doc["hawkes_b"] = b;
      break;
    }
    case ProcessKind::self_correcting:
      doc["sc_mu"] = spec.sc_mu;
      doc["sc_alpha"] = spec.sc_alpha;
      break;
    case ProcessKind::mod_renewal:
    case ProcessKind::ipp:
      doc["ipp_base"] = spec.intensity.base;
      doc["ipp_amplitude"] = spec.intensity.amplitude;
      doc["ipp_period"] = spec.intensity.period;
      if (spec.kind == ProcessKind::ipp) break;
      [[fallthrough]];
    case ProcessKind::renewal:
      doc["law"] = law_name(spec.law.kind);
      doc["law_mean"] = spec.law.mean;
      doc["law_stddev"] = spec.law.stddev;
      break;
  }
  return doc.dump();
}

std::array<double, 3> split_ratios_from_json(const std::string& text) {
  const std::string what = "dataset spec";
  const auto doc = parse_object(text, what);
  std::array<double, 3> r{get_number(doc, "train_ratio", 0.6, what), get_number(doc, "val_ratio", 0.2, what),
                          get_number(doc, "test_ratio", 0.2, what)};
  for (double x : r) {
    if (!(x >= 0.0)) throw std::invalid_argument(what + ": split ratios must be nonnegative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw std::invalid_argument(what + ": fields 'train_ratio', 'val_ratio', 'test_ratio' must sum to 1");
  }
  return r;
}

TrainConfig train_config_from_json(const std::string& text) {
  const std::string what = "train config";
  const auto doc = parse_object(text, what);
  reject_unknown(doc,
                 {"learning_rate", "batch_size", "max_epochs", "patience", "validation_samples",
                  "validation_interval", "n_steps", "n_components", "hidden_dim", "seed", "conditional", "horizon", "hpp_rate", "ema_decay"},
                 what);
  TrainConfig c;
  c.learning_rate = get_number(doc, "learning_rate", c.learning_rate, what);
  c.batch_size = narrow_int(get_integer(doc, "batch_size", c.batch_size, what), "batch_size", what);
  c.max_epochs = narrow_int(get_integer(doc, "max_epochs", c.max_epochs, what), "max_epochs", what);
  c.patience = narrow_int(get_integer(doc, "patience", c.patience, what), "patience", what);
  c.validation_samples =
      narrow_int(get_integer(doc, "validation_samples", c.validation_samples, what), "validation_samples", what);
  c.validation_interval =
      narrow_int(get_integer(doc, "validation_interval", c.validation_interval, what), "validation_interval", what);
  c.n_steps = narrow_int(get_integer(doc, "n_steps", c.n_steps, what), "n_steps", what);
  c.n_components = narrow_int(get_integer(doc, "n_components", c.n_components, what), "n_components", what);
  c.hidden_dim = narrow_int(get_integer(doc, "hidden_dim", c.hidden_dim, what), "hidden_dim", what);
  c.seed = get_seed(doc, "seed", c.seed, what);
  c.conditional = get_bool(doc, "conditional", c.conditional, what);
  c.horizon = get_number(doc, "horizon", c.horizon, what);
  c.hpp_rate = get_number(doc, "hpp_rate", c.hpp_rate, what);
  c.ema_decay = get_number(doc, "ema_decay", c.ema_decay, what);
  c.validate();
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  json doc;
  doc["learning_rate"] = c.learning_rate;
  doc["batch_size"] = c.batch_size;
  doc["max_epochs"] = c.max_epochs;
  doc["patience"] = c.patience;
  doc["validation_samples"] = c.validation_samples;
  doc["validation_interval"] = c.validation_interval;
  doc["n_steps"] = c.n_steps;
  doc["n_components"] = c.n_components;
  doc["hidden_dim"] = c.hidden_dim;
  doc["seed"] = c.seed;
  doc["conditional"] = c.conditional;
  doc["horizon"] = c.horizon;
  doc["hpp_rate"] = c.hpp_rate;
  doc["ema_decay"] = c.ema_decay;
  return doc.dump();
}

std::string to_json_record(const MetricRecordOut& record) {
  json doc;
  doc["metric"] = record.metric;
  doc["value"] = record.value;
  doc["n_samples"] = record.n_samples;
  doc["seed"] = record.seed;
  doc["bandwidth"] = record.bandwidth ? json(*record.bandwidth) : json(nullptr);
  return doc.dump();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace addthin
