#pragma once

// Run configuration and the train / bench / codec-demo / synth workflows
// behind the command-line tool.

#include <cstdint>
#include <string>
#include <vector>

#include "vfxgb/batch_codec.h"
#include "vfxgb/data.h"
#include "vfxgb/federation/active_party.h"
#include "vfxgb/federation/ledger.h"
#include "vfxgb/federation/session.h"
#include "vfxgb/xgb_core.h"

namespace vfxgb::run {

struct DatasetSource {
  enum class Kind { kSynth, kCsv };
  Kind kind = Kind::kSynth;
  // synth
  std::size_t n = 2000;
  std::size_t d_ap = 5;
  std::size_t d_pp = 10;
  std::uint64_t seed = 7;
  // csv
  std::string path;
  std::string label_column = "label";
  std::string id_column;
  bool drop_incomplete = false;
};

struct BenchSpec {
  std::string sweep = "key_bits";  // key_bits | samples | trees
  std::vector<std::int64_t> values{128, 256};
  std::vector<fed::GradientMode> modes{fed::GradientMode::kBatched, fed::GradientMode::kPerValue};
  int repeats = 1;
  bool include_warmup = false;  // by default one discarded run precedes the sweep
  bool parallel = false;
};

struct RunConfig {
  DatasetSource dataset;
  data::VerticalSplitPlan split;  // empty: synth plan, or first `active_columns` CSV columns
  int active_columns = -1;
  double test_fraction = 0.25;
  fed::GradientMode mode = fed::GradientMode::kBatched;
  int key_bits = 256;
  codec::BatchConfig codec;
  xgb::TreeParams xgb;
  std::uint64_t seed = 42;
  std::string channel = "inproc";
  fed::OverflowPolicy overflow = fed::OverflowPolicy::kAbort;
  std::string out = "vfxgb_out";
  BenchSpec bench;

  // Unknown keys and ill-typed values raise ConfigError.
  static RunConfig from_json(const std::string& text);
  static RunConfig from_file(const std::string& path);
  // Fully resolved: every field written, defaults expanded.
  std::string to_json() const;

  // Dotted-path override, e.g. set("xgb.trees", "5"), set("codec.shift", "[-4,-4]").
  // Values are parsed as JSON, falling back to a plain string.
  void set(const std::string& key, const std::string& value);

  // Throws ConfigError on the first invalid field, before any work starts.
  void validate() const;

  fed::FederationConfig federation() const;
};

struct Metrics {
  double auc_train = 0.5;
  double auc_test = 0.5;
  double ks_train = 0.0;
  double ks_test = 0.0;
  double log_loss_train = 0.0;
  double log_loss_test = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;

  std::string to_json() const;
};

struct TrainOutcome {
  xgb::BoostedModel model;
  fed::CostLedger ledger;
  Metrics metrics;
  std::vector<std::string> lookup_tables;  // one JSON document per Passive Party
  std::string resolved_config;
  std::uint64_t routing_queries = 0;
};

// Loads or generates the dataset, splits it into train/test and party views.
struct PreparedData {
  data::Dataset train;
  data::Dataset test;
  data::VerticalSplitPlan plan;
};
PreparedData prepare_data(const RunConfig& cfg);

TrainOutcome train(const RunConfig& cfg);
TrainOutcome train(const RunConfig& cfg, const PreparedData& prepared);

// Writes model.json, pp_lookup.json, metrics.json, ledger.json and
// resolved_config.json into `dir` (created if missing).
void write_outputs(const TrainOutcome& outcome, const std::string& dir);

struct BenchRow {
  std::string sweep;
  double value = 0.0;
  std::string mode;  // batched, per_value, or ratio (batched / per_value)
  double total_runtime_s = 0.0;
  double per_tree_runtime_s = 0.0;
  double encryptions = 0.0;
  double ciphertext_bytes = 0.0;
  double gradient_ciphertext_bytes = 0.0;
  double homomorphic_adds = 0.0;
  double auc_train = 0.0;
  double auc_test = 0.0;
  double ks_train = 0.0;
  double ks_test = 0.0;
};

std::vector<BenchRow> bench(const RunConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_jsonl(const std::vector<BenchRow>& rows);

struct CodecDemo {
  std::string json;
  std::string text;
};
CodecDemo codec_demo();

// Synthetic dataset as CSV text.
std::string synth_csv(std::size_t n, std::size_t d_ap, std::size_t d_pp, std::uint64_t seed);

}  // namespace vfxgb::run
