#include "vfxgb/runner.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <set>
#include <sstream>
#include <type_traits>

#include "vfxgb/error.h"
#include "vfxgb/metrics.h"

namespace vfxgb::run {
namespace {

using json = nlohmann::json;

// Reads an object field by field and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) throw ConfigError(where(key) + "must be a non-negative integer");
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + "has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key().c_str()) + "unknown key");
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_;
    if (key) p += p.empty() ? key : "." + std::string(key);
    return "config" + (p.empty() ? std::string() : " '" + p + "'") + ": ";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string overflow_name(fed::OverflowPolicy p) { return p == fed::OverflowPolicy::kAbort ? "abort" : "warn"; }

fed::OverflowPolicy parse_overflow(const std::string& s) {
  if (s == "abort") return fed::OverflowPolicy::kAbort;
  if (s == "warn") return fed::OverflowPolicy::kWarn;
  throw ConfigError("config 'overflow': expected abort or warn, got '" + s + "'");
}

fed::GradientMode mode_from(const std::string& s) {
  try {
    return fed::parse_gradient_mode(s);
  } catch (const Error&) {
    throw ConfigError("config 'mode': expected batched or per_value, got '" + s + "'");
  }
}

json config_json(const RunConfig& c) {
  json ds;
  if (c.dataset.kind == DatasetSource::Kind::kSynth) {
    ds = {{"kind", "synth"}, {"n", c.dataset.n}, {"d_ap", c.dataset.d_ap}, {"d_pp", c.dataset.d_pp},
          {"seed", c.dataset.seed}};
  } else {
    ds = {{"kind", "csv"},
          {"path", c.dataset.path},
          {"label", c.dataset.label_column},
          {"id_column", c.dataset.id_column},
          {"drop_incomplete", c.dataset.drop_incomplete}};
  }
  json modes = json::array();
  for (auto m : c.bench.modes) modes.push_back(std::string(fed::to_string(m)));
  return {
      {"dataset", ds},
      {"split", {{"active", c.split.active}, {"passive", c.split.passive}}},
      {"active_columns", c.active_columns},
      {"test_fraction", c.test_fraction},
      {"mode", std::string(fed::to_string(c.mode))},
      {"key_bits", c.key_bits},
      {"codec",
       {{"r", c.codec.r},
        {"pad", c.codec.pad},
        {"shift", c.codec.shift},
        {"alpha", c.codec.alpha},
        {"alpha_max", c.codec.alpha_max}}},
      {"xgb",
       {{"trees", c.xgb.num_trees},
        {"lambda", c.xgb.lambda},
        {"gamma", c.xgb.gamma},
        {"buckets", c.xgb.num_buckets},
        {"max_depth", c.xgb.max_depth},
        {"eta", c.xgb.eta},
        {"base_score", c.xgb.base_score}}},
      {"seed", c.seed},
      {"channel", c.channel},
      {"overflow", overflow_name(c.overflow)},
      {"out", c.out},
      {"bench",
       {{"sweep", c.bench.sweep},
        {"values", c.bench.values},
        {"modes", modes},
        {"repeats", c.bench.repeats},
        {"include_warmup", c.bench.include_warmup},
        {"parallel", c.bench.parallel}}},
  };
}

RunConfig config_from(const json& j) {
  RunConfig c;
  Reader top(j, "");
  if (top.has("dataset")) {
    Reader r(top.at("dataset"), "dataset");
    std::string kind = "synth";
    r.get("kind", kind);
    if (kind == "synth") {
      c.dataset.kind = DatasetSource::Kind::kSynth;
      r.get("n", c.dataset.n);
      r.get("d_ap", c.dataset.d_ap);
      r.get("d_pp", c.dataset.d_pp);
      r.get("seed", c.dataset.seed);
    } else if (kind == "csv") {
      c.dataset.kind = DatasetSource::Kind::kCsv;
      r.get("path", c.dataset.path);
      r.get("label", c.dataset.label_column);
      r.get("id_column", c.dataset.id_column);
      r.get("drop_incomplete", c.dataset.drop_incomplete);
    } else {
      throw ConfigError("config 'dataset.kind': expected synth or csv, got '" + kind + "'");
    }
    r.finish();
  }
  if (top.has("split")) {
    Reader r(top.at("split"), "split");
    r.get("active", c.split.active);
    r.get("passive", c.split.passive);
    r.finish();
  }
  top.get("active_columns", c.active_columns);
  top.get("test_fraction", c.test_fraction);
  std::string mode = std::string(fed::to_string(c.mode));
  top.get("mode", mode);
  c.mode = mode_from(mode);
  top.get("key_bits", c.key_bits);
  if (top.has("codec")) {
    Reader r(top.at("codec"), "codec");
    r.get("r", c.codec.r);
    r.get("pad", c.codec.pad);
    r.get("shift", c.codec.shift);
    r.get("alpha", c.codec.alpha);
    r.get("alpha_max", c.codec.alpha_max);
    r.finish();
  }
  if (top.has("xgb")) {
    Reader r(top.at("xgb"), "xgb");
    r.get("trees", c.xgb.num_trees);
    r.get("lambda", c.xgb.lambda);
    r.get("gamma", c.xgb.gamma);
    r.get("buckets", c.xgb.num_buckets);
    r.get("max_depth", c.xgb.max_depth);
    r.get("eta", c.xgb.eta);
    r.get("base_score", c.xgb.base_score);
    r.finish();
  }
  top.get("seed", c.seed);
  top.get("channel", c.channel);
  std::string overflow = overflow_name(c.overflow);
  top.get("overflow", overflow);
  c.overflow = parse_overflow(overflow);
  top.get("out", c.out);
  if (top.has("bench")) {
    Reader r(top.at("bench"), "bench");
    r.get("sweep", c.bench.sweep);
    r.get("values", c.bench.values);
    std::vector<std::string> modes;
    r.get("modes", modes);
    if (!modes.empty()) {
      c.bench.modes.clear();
      for (const auto& m : modes) c.bench.modes.push_back(mode_from(m));
    }
    r.get("repeats", c.bench.repeats);
    r.get("include_warmup", c.bench.include_warmup);
    r.get("parallel", c.bench.parallel);
    r.finish();
  }
  top.finish();
  return c;
}

json parse_or_throw(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> probabilities(const std::vector<double>& scores) {
  std::vector<double> p(scores.size());
  std::transform(scores.begin(), scores.end(), p.begin(), xgb::sigmoid);
  return p;
}

bool both_classes(const std::vector<int>& labels) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void assign_path(json& root, const std::string& key, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty() || !node->is_object()) throw ConfigError("config override: bad key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) { return config_from(parse_or_throw(text, "config")); }

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::to_json() const { return config_json(*this).dump(2); }

void RunConfig::set(const std::string& key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json j = config_json(*this);
  // switching the dataset kind drops the keys of the previous kind
  if (key == "dataset.kind" && parsed != j["dataset"]["kind"]) j["dataset"] = json::object();
  assign_path(j, key, parsed);
  try {
    *this = config_from(j);
  } catch (const ConfigError&) {
    if (parsed.is_string()) throw;
    // "123" meant for a string field such as a path
    j = config_json(*this);
    assign_path(j, key, value);
    *this = config_from(j);
  }
}

void RunConfig::validate() const {
  if (dataset.kind == DatasetSource::Kind::kSynth) {
    if (dataset.n < 10) throw ConfigError("config 'dataset.n': need at least 10 rows");
  } else {
    if (dataset.path.empty()) throw ConfigError("config 'dataset.path': required for csv datasets");
    if (dataset.label_column.empty()) throw ConfigError("config 'dataset.label': required for csv datasets");
    if (split.active.empty() && split.passive.empty() && active_columns < 0) {
      throw ConfigError("config: csv datasets need 'split' lists or 'active_columns'");
    }
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("config 'test_fraction': must lie strictly between 0 and 1");
  }
  federation().validate();
  fed::ChannelSpec::parse(channel);
  if (out.empty()) throw ConfigError("config 'out': must not be empty");
  if (bench.sweep != "key_bits" && bench.sweep != "samples" && bench.sweep != "trees") {
    throw ConfigError("config 'bench.sweep': expected key_bits, samples or trees");
  }
  if (bench.repeats < 1) throw ConfigError("config 'bench.repeats': must be >= 1");
  if (bench.modes.empty()) throw ConfigError("config 'bench.modes': must not be empty");
  for (std::int64_t v : bench.values) {
    if (bench.sweep == "key_bits" && !paillier::is_supported_key_bits(static_cast<int>(v))) {
      throw ConfigError("config 'bench.values': unsupported key_bits " + std::to_string(v));
    }
    if (bench.sweep == "samples" && v < 10) throw ConfigError("config 'bench.values': samples must be >= 10");
    if (bench.sweep == "trees" && v < 0) throw ConfigError("config 'bench.values': trees must be >= 0");
  }
}

fed::FederationConfig RunConfig::federation() const {
  fed::FederationConfig f;
  f.mode = mode;
  f.codec = codec;
  f.codec.d = 2;
  f.params = xgb;
  f.key_bits = key_bits;
  f.seed = seed;
  f.overflow = overflow;
  return f;
}

std::string Metrics::to_json() const {
  return json{{"auc_train", auc_train},       {"auc_test", auc_test},         {"ks_train", ks_train},
              {"ks_test", ks_test},           {"log_loss_train", log_loss_train}, {"log_loss_test", log_loss_test},
              {"n_train", n_train},           {"n_test", n_test}}
      .dump(2);
}

PreparedData prepare_data(const RunConfig& cfg) {
  data::Dataset ds;
  data::VerticalSplitPlan plan = cfg.split;
  if (cfg.dataset.kind == DatasetSource::Kind::kSynth) {
    auto [synth, synth_plan] = data::synth_credit(cfg.dataset.n, cfg.dataset.d_ap, cfg.dataset.d_pp, cfg.dataset.seed);
    ds = std::move(synth);
    if (plan.active.empty() && plan.passive.empty()) plan = std::move(synth_plan);
  } else {
    data::LoadOptions opts;
    opts.drop_incomplete_rows = cfg.dataset.drop_incomplete;
    opts.id_column = cfg.dataset.id_column;
    ds = data::load_csv(cfg.dataset.path, cfg.dataset.label_column, opts);
    if (plan.active.empty() && plan.passive.empty()) {
      const auto& names = ds.features.names;
      const std::size_t k = static_cast<std::size_t>(cfg.active_columns);
      if (k > names.size()) throw ConfigError("config 'active_columns': dataset has only " +
                                              std::to_string(names.size()) + " feature columns");
      plan.active.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(k));
      plan.passive.assign(names.begin() + static_cast<std::ptrdiff_t>(k), names.end());
    }
  }
  auto [train, test] = data::train_test_split(ds, cfg.test_fraction, cfg.seed);
  return PreparedData{std::move(train), std::move(test), std::move(plan)};
}

TrainOutcome train(const RunConfig& cfg) {
  cfg.validate();
  return train(cfg, prepare_data(cfg));
}

TrainOutcome train(const RunConfig& cfg, const PreparedData& prepared) {
  cfg.validate();
  auto [ap_train, pp_train] = data::vertical_split(prepared.train, prepared.plan);
  auto [ap_test, pp_test] = data::vertical_split(prepared.test, prepared.plan);

  TrainOutcome out;
  out.resolved_config = cfg.to_json();
  fed::FederatedSession session(ap_train, {pp_train}, cfg.federation(), fed::ChannelSpec::parse(cfg.channel));
  fed::TrainingResult result = session.train();

  fed::PartyCosts inference;
  const std::vector<double> test_scores =
      session.predict(result.model, ap_test.features, {pp_test.features}, &inference);
  out.routing_queries = inference.routing_queries;

  Metrics& m = out.metrics;
  m.n_train = ap_train.num_rows();
  m.n_test = ap_test.num_rows();
  if (both_classes(ap_train.labels)) {
    m.auc_train = metrics::auc(ap_train.labels, result.train_scores);
    m.ks_train = metrics::ks(ap_train.labels, result.train_scores);
  }
  if (both_classes(ap_test.labels)) {
    m.auc_test = metrics::auc(ap_test.labels, test_scores);
    m.ks_test = metrics::ks(ap_test.labels, test_scores);
  }
  m.log_loss_train = metrics::log_loss(ap_train.labels, probabilities(result.train_scores));
  m.log_loss_test = metrics::log_loss(ap_test.labels, probabilities(test_scores));

  for (std::size_t p = 0; p < session.num_passive(); ++p) {
    out.lookup_tables.push_back(session.passive_party(p).lookup_table_json());
  }
  out.model = std::move(result.model);
  out.ledger = std::move(result.ledger);
  return out;
}

void write_outputs(const TrainOutcome& outcome, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const fs::path base(dir);
  write_file(base / "model.json", xgb::model_to_json(outcome.model));
  json tables = json::array();
  for (const auto& t : outcome.lookup_tables) tables.push_back(json::parse(t));
  write_file(base / "pp_lookup.json", tables.dump(1));
  write_file(base / "metrics.json", outcome.metrics.to_json());
  write_file(base / "ledger.json", outcome.ledger.to_json());
  write_file(base / "resolved_config.json", outcome.resolved_config);
}

std::vector<BenchRow> bench(const RunConfig& base) {
  base.validate();
  if (base.bench.values.empty()) throw ConfigError("config 'bench.values': sweep is empty");

  auto point_config = [&](std::int64_t value, fed::GradientMode mode) {
    RunConfig c = base;
    c.mode = mode;
    if (base.bench.sweep == "key_bits") c.key_bits = static_cast<int>(value);
    if (base.bench.sweep == "samples") c.dataset.n = static_cast<std::size_t>(value);
    if (base.bench.sweep == "trees") c.xgb.num_trees = static_cast<int>(value);
    c.validate();
    return c;
  };

  if (!base.bench.include_warmup) {
    const RunConfig warm = point_config(base.bench.values.front(), base.bench.modes.front());
    train(warm, prepare_data(warm));
  }

  auto run_point = [&](std::int64_t value) {
    std::vector<BenchRow> rows;
    const PreparedData prepared = prepare_data(point_config(value, base.bench.modes.front()));
    for (fed::GradientMode mode : base.bench.modes) {
      BenchRow row;
      row.sweep = base.bench.sweep;
      row.value = static_cast<double>(value);
      row.mode = std::string(fed::to_string(mode));
      rows.push_back(row);
    }
    // modes alternate within each repeat so drift in machine load hits both
    for (int rep = 0; rep < base.bench.repeats; ++rep) {
      for (std::size_t k = 0; k < base.bench.modes.size(); ++k) {
        const TrainOutcome o = train(point_config(value, base.bench.modes[k]), prepared);
        BenchRow& row = rows[k];
        row.total_runtime_s += o.ledger.total_seconds / base.bench.repeats;
        row.per_tree_runtime_s += o.ledger.mean_tree_seconds() / base.bench.repeats;
        if (rep == 0) {
          row.encryptions = static_cast<double>(o.ledger.encryptions());
          row.ciphertext_bytes = static_cast<double>(o.ledger.ciphertext_bytes());
          row.gradient_ciphertext_bytes = static_cast<double>(o.ledger.gradient_ciphertext_bytes());
          row.homomorphic_adds = static_cast<double>(o.ledger.homomorphic_adds());
          row.auc_train = o.metrics.auc_train;
          row.auc_test = o.metrics.auc_test;
          row.ks_train = o.metrics.ks_train;
          row.ks_test = o.metrics.ks_test;
        }
      }
    }
    const BenchRow* b = nullptr;
    const BenchRow* p = nullptr;
    for (const auto& r : rows) {
      if (r.mode == "batched") b = &r;
      if (r.mode == "per_value") p = &r;
    }
    if (b && p) {
      auto ratio = [](double x, double y) { return y == 0.0 ? std::nan("") : x / y; };
      BenchRow r;
      r.sweep = base.bench.sweep;
      r.value = static_cast<double>(value);
      r.mode = "ratio";
      r.total_runtime_s = ratio(b->total_runtime_s, p->total_runtime_s);
      r.per_tree_runtime_s = ratio(b->per_tree_runtime_s, p->per_tree_runtime_s);
      r.encryptions = ratio(b->encryptions, p->encryptions);
      r.ciphertext_bytes = ratio(b->ciphertext_bytes, p->ciphertext_bytes);
      r.gradient_ciphertext_bytes = ratio(b->gradient_ciphertext_bytes, p->gradient_ciphertext_bytes);
      r.homomorphic_adds = ratio(b->homomorphic_adds, p->homomorphic_adds);
      r.auc_train = ratio(b->auc_train, p->auc_train);
      r.auc_test = ratio(b->auc_test, p->auc_test);
      r.ks_train = ratio(b->ks_train, p->ks_train);
      r.ks_test = ratio(b->ks_test, p->ks_test);
      rows.push_back(r);
    }
    return rows;
  };

  std::vector<BenchRow> out;
  if (base.bench.parallel) {
    std::vector<std::future<std::vector<BenchRow>>> jobs;
    for (std::int64_t v : base.bench.values) jobs.push_back(std::async(std::launch::async, run_point, v));
    for (auto& j : jobs) {
      auto rows = j.get();
      out.insert(out.end(), rows.begin(), rows.end());
    }
  } else {
    for (std::int64_t v : base.bench.values) {
      auto rows = run_point(v);
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
  return out;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "sweep,value,mode,total_runtime_s,per_tree_runtime_s,encryptions,ciphertext_bytes,"
        "gradient_ciphertext_bytes,homomorphic_adds,auc_train,auc_test,ks_train,ks_test\n";
  for (const auto& r : rows) {
    os << r.sweep << ',' << fmt(r.value) << ',' << r.mode << ',' << fmt(r.total_runtime_s) << ','
       << fmt(r.per_tree_runtime_s) << ',' << fmt(r.encryptions) << ',' << fmt(r.ciphertext_bytes) << ','
       << fmt(r.gradient_ciphertext_bytes) << ',' << fmt(r.homomorphic_adds) << ',' << fmt(r.auc_train) << ','
       << fmt(r.auc_test) << ',' << fmt(r.ks_train) << ',' << fmt(r.ks_test) << '\n';
  }
  return os.str();
}

std::string bench_jsonl(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const auto& r : rows) {
    os << json{{"sweep", r.sweep},
               {"value", r.value},
               {"mode", r.mode},
               {"total_runtime_s", num(r.total_runtime_s)},
               {"per_tree_runtime_s", num(r.per_tree_runtime_s)},
               {"encryptions", num(r.encryptions)},
               {"ciphertext_bytes", num(r.ciphertext_bytes)},
               {"gradient_ciphertext_bytes", num(r.gradient_ciphertext_bytes)},
               {"homomorphic_adds", num(r.homomorphic_adds)},
               {"auc_train", num(r.auc_train)},
               {"auc_test", num(r.auc_test)},
               {"ks_train", num(r.ks_train)},
               {"ks_test", num(r.ks_test)}}
              .dump()
       << '\n';
  }
  return os.str();
}

CodecDemo codec_demo() {
  std::ostringstream text;
  json report;

  // Two's complement codec: 7-bit values, 2 protection bits, resolution 1.
  codec::BatchConfig sc;
  sc.d = 1;
  sc.r = 6;
  sc.pad = 2;
  sc.shift = {0.0};
  sc.alpha = 63;
  sc.alpha_max = 64;
  const int sw = sc.r + 1 + sc.pad;
  auto signed_field = [&](double v) { return codec::signed_encode(sc, std::span<const double>(&v, 1)).z; };
  const BigInt a = signed_field(-1.0);
  const BigInt b = signed_field(-6.0);
  const codec::DecodedSum pair = codec::signed_decode_sum(sc, a + b, 2);
  text << "signed codec (r=6, pad=2)\n";
  text << "  -1        " << codec::field_bits(a, sw) << "\n";
  text << "  -6        " << codec::field_bits(b, sw) << "\n";
  text << "  sum       " << codec::field_bits(pair.slot_sums[0], sw) << "  protection "
       << codec::field_bits(pair.protection_bits[0], sc.pad) << "\n";
  json negatives = json::array();
  BigInt acc = 0;
  for (int k = 1; k <= 5; ++k) {
    acc += a;
    const codec::DecodedSum d = codec::signed_decode_sum(sc, acc, static_cast<std::uint64_t>(k));
    const bool carry = bit_length(acc) > static_cast<std::size_t>(sw);
    const std::string bits = codec::field_bits(acc, carry ? sw + 1 : sw);
    negatives.push_back({{"count", k},
                         {"sum_bits", bits},
                         {"protection_bits", codec::field_bits(d.protection_bits[0], sc.pad)},
                         {"carry_out", carry},
                         {"overflow", d.any_overflow()}});
    text << "  " << k << " x (-1)   " << bits << "  protection "
         << codec::field_bits(d.protection_bits[0], sc.pad) << (d.any_overflow() ? "  OVERFLOW" : "") << "\n";
  }
  report["signed"] = {{"r", sc.r},
                      {"pad", sc.pad},
                      {"fields", {codec::field_bits(a, sw), codec::field_bits(b, sw)}},
                      {"sum_bits", codec::field_bits(pair.slot_sums[0], sw)},
                      {"protection_bits", codec::field_bits(pair.protection_bits[0], sc.pad)},
                      {"overflow", pair.any_overflow()},
                      {"negatives", negatives}};

  // Shifted codec: s = -6, alpha = 20, alpha_max = 2^8, r = 8.
  codec::BatchConfig pc;
  pc.d = 1;
  pc.r = 8;
  pc.pad = 2;
  pc.shift = {-6.0};
  pc.alpha = 20;
  pc.alpha_max = 256;
  const int pw = pc.r + pc.pad;
  const double va = -1.0;
  const double vb = -6.0;
  const BigInt za = codec::encode(pc, std::span<const double>(&va, 1)).z;
  const BigInt zb = codec::encode(pc, std::span<const double>(&vb, 1)).z;
  const codec::DecodedSum dec = codec::decode_sum(pc, za + zb, 2);
  text << "shifted codec (r=8, pad=2, s=-6, alpha=20, alpha_max=256)\n";
  text << "  -1        " << codec::field_bits(za, pw) << "\n";
  text << "  -6        " << codec::field_bits(zb, pw) << "\n";
  text << "  sum       " << codec::field_bits(dec.slot_sums[0], pw) << "  protection "
       << codec::field_bits(dec.protection_bits[0], pc.pad) << "  decoded " << dec.values[0] << "\n";
  report["shifted"] = {{"r", pc.r},
                       {"pad", pc.pad},
                       {"shift", pc.shift[0]},
                       {"alpha", pc.alpha},
                       {"alpha_max", pc.alpha_max},
                       {"fields", {codec::field_bits(za, pw), codec::field_bits(zb, pw)}},
                       {"sum_bits", codec::field_bits(dec.slot_sums[0], pw)},
                       {"protection_bits", codec::field_bits(dec.protection_bits[0], pc.pad)},
                       {"decoded", dec.values[0]},
                       {"overflow", dec.any_overflow()}};
  return CodecDemo{report.dump(2), text.str()};
}

std::string synth_csv(std::size_t n, std::size_t d_ap, std::size_t d_pp, std::uint64_t seed) {
  return data::to_csv(data::synth_credit(n, d_ap, d_pp, seed).first);
}

}  // namespace vfxgb::run
