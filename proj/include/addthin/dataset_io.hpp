#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "addthin/datagen.hpp"
#include "addthin/event_sequence.hpp"
#include "addthin/trainer.hpp"

namespace addthin {

/// One JSON object per line: {"arrival_times": [...], "t_max": T}.
std::string to_jsonl_record(const EventSequence& seq);
void write_jsonl(std::ostream& out, std::span<const EventSequence> sequences);
/// Throws std::invalid_argument naming `source` and the 1-based line number
/// of the first malformed record. Blank lines are skipped.
std::vector<EventSequence> read_jsonl(std::istream& in, const std::string& source = "<stream>");

std::vector<EventSequence> read_jsonl_file(const std::string& path);
void write_jsonl_file(const std::string& path, std::span<const EventSequence> sequences);

/// Split assignment of a dataset file plus the generator parameters that produced it.
struct SplitManifest {
  std::string dataset;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  SplitIndices indices;
  /// Generator parameters as a JSON object text; empty for ingested data.
  std::string generator;
};

std::string manifest_to_json(const SplitManifest& manifest);
SplitManifest manifest_from_json(const std::string& text);

/// Flat JSON object parsers. Unknown keys and ill-typed values are rejected
/// with a message naming the key.
DatasetSpec dataset_spec_from_json(const std::string& text);
std::string dataset_spec_to_json(const DatasetSpec& spec);
/// Also reads the split ratios ("train_ratio", "val_ratio", "test_ratio").
std::array<double, 3> split_ratios_from_json(const std::string& text);
TrainConfig train_config_from_json(const std::string& text);
std::string train_config_to_json(const TrainConfig& config);

struct MetricRecordOut {
  std::string metric;
  double value = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> bandwidth;
};

std::string to_json_record(const MetricRecordOut& record);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace addthin
