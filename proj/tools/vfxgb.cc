// vfxgb command-line tool. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vfxgb/c_api.h"

namespace {

int exit_code(vfxgb_status s) {
  switch (s) {
    case VFXGB_OK: return 0;
    case VFXGB_ERR_INVALID_ARGUMENT:
    case VFXGB_ERR_CONFIG: return 2;
    case VFXGB_ERR_OVERFLOW: return 3;
    case VFXGB_ERR_PROTOCOL:
    case VFXGB_ERR_IO: return 4;
    default: return 1;
  }
}

struct Failure {
  vfxgb_status status;
};

void check(vfxgb_status s) {
  if (s != VFXGB_OK) throw Failure{s};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  vfxgb_string_free(s);
  return out;
}

struct ConfigHandle {
  vfxgb_config* p = nullptr;
  ~ConfigHandle() { vfxgb_config_free(p); }
};

struct RunHandle {
  vfxgb_run* p = nullptr;
  ~RunHandle() { vfxgb_run_free(p); }
};

// Flags shared by train and bench; unset ones leave the config file value.
struct CommonFlags {
  std::string config;
  std::optional<std::string> mode;
  std::optional<int> key_bits;
  std::optional<int> trees;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> channel;
  std::vector<std::string> overrides;
  bool json = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--mode", mode, "batched | per-value");
    cmd->add_option("--key-bits", key_bits, "Paillier modulus size");
    cmd->add_option("--trees", trees, "number of boosting rounds");
    cmd->add_option("--seed", seed, "run seed");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--channel", channel, "inproc | queue | tcp:HOST:PORT");
    cmd->add_option("--set", overrides, "override a config key, e.g. --set xgb.max_depth=3");
    cmd->add_flag("--json", json, "machine-readable output");
  }

  void apply(ConfigHandle& cfg) const {
    if (config.empty()) {
      check(vfxgb_config_new(&cfg.p));
    } else {
      check(vfxgb_config_from_file(config.c_str(), &cfg.p));
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "error: --set expects KEY=VALUE, got '" << kv << "'\n";
        throw Failure{VFXGB_ERR_CONFIG};
      }
      check(vfxgb_config_set(cfg.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    auto set_str = [&](const char* key, const std::string& v) { check(vfxgb_config_set(cfg.p, key, v.c_str())); };
    auto set_raw = [&](const char* key, const std::string& v) {
      // quoted so the value always lands as a JSON string
      set_str(key, "\"" + v + "\"");
    };
    if (mode) set_raw("mode", *mode);
    if (key_bits) set_str("key_bits", std::to_string(*key_bits));
    if (trees) set_str("xgb.trees", std::to_string(*trees));
    if (seed) set_str("seed", std::to_string(*seed));
    if (out) set_raw("out", *out);
    if (channel) set_raw("channel", *channel);
    check(vfxgb_config_validate(cfg.p));
  }
};

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

int cmd_train(const CommonFlags& flags) {
  ConfigHandle cfg;
  flags.apply(cfg);
  RunHandle run;
  check(vfxgb_train(cfg.p, &run.p));
  char* dir = nullptr;
  check(vfxgb_config_out_dir(cfg.p, &dir));
  const std::string out_dir = take(dir);
  check(vfxgb_run_write(run.p, out_dir.c_str()));
  char* metrics = nullptr;
  check(vfxgb_run_metrics_json(run.p, &metrics));
  const std::string m = take(metrics);
  if (flags.json) {
    std::cout << m << "\n";
  } else {
    std::uint64_t enc = 0;
    double auc = 0.0;
    check(vfxgb_run_encryptions(run.p, &enc));
    check(vfxgb_run_test_auc(run.p, &auc));
    std::cout << "trained; test AUC " << auc << ", " << enc << " encryptions\n"
              << "outputs written to " << out_dir << "\n";
  }
  return 0;
}

int cmd_bench(const CommonFlags& flags, const std::optional<std::string>& sweep,
              const std::optional<std::string>& values, const std::optional<int>& repeats, bool include_warmup,
              bool parallel, const std::optional<std::string>& table) {
  ConfigHandle cfg;
  flags.apply(cfg);
  if (sweep) check(vfxgb_config_set(cfg.p, "bench.sweep", ("\"" + *sweep + "\"").c_str()));
  if (values) check(vfxgb_config_set(cfg.p, "bench.values", ("[" + *values + "]").c_str()));
  if (repeats) check(vfxgb_config_set(cfg.p, "bench.repeats", std::to_string(*repeats).c_str()));
  if (include_warmup) check(vfxgb_config_set(cfg.p, "bench.include_warmup", "true"));
  if (parallel) check(vfxgb_config_set(cfg.p, "bench.parallel", "true"));
  check(vfxgb_config_validate(cfg.p));
  char* result = nullptr;
  check(vfxgb_bench(cfg.p, flags.json ? 1 : 0, &result));
  const std::string text = take(result);
  std::cout << text;
  if (table && !write_text(*table, text)) {
    std::cerr << "error: cannot write " << *table << "\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertical federated XGBoost with batched Paillier gradients"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vfxgb_version());

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "train a federated model and evaluate it");
  train_flags.add_to(train);

  CommonFlags bench_flags;
  std::optional<std::string> sweep, values, table;
  std::optional<int> repeats;
  bool include_warmup = false, parallel = false;
  auto* bench = app.add_subcommand("bench", "sweep key size, sample count or tree count in both modes");
  bench_flags.add_to(bench);
  bench->add_option("--sweep", sweep, "key_bits | samples | trees");
  bench->add_option("--values", values, "comma-separated sweep values");
  bench->add_option("--repeats", repeats, "runs averaged per point");
  bench->add_flag("--include-warmup", include_warmup, "count the warm-up run instead of discarding it");
  bench->add_flag("--parallel", parallel, "run sweep points concurrently");
  bench->add_option("--table", table, "also write the results table to this file");

  bool demo_json = false;
  auto* demo = app.add_subcommand("codec-demo", "show negative-value carries in a signed codec vs. the shifted one");
  demo->add_flag("--json", demo_json, "JSON report");

  std::size_t n = 2000, d_ap = 5, d_pp = 10;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "emit a synthetic credit-style dataset as CSV");
  synth->add_option("-n,--rows", n, "rows")->check(CLI::Range(10, 100000000));
  synth->add_option("--d-ap", d_ap, "active-party features");
  synth->add_option("--d-pp", d_pp, "passive-party features");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("-o,--output", synth_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(train_flags);
    if (*bench) return cmd_bench(bench_flags, sweep, values, repeats, include_warmup, parallel, table);
    if (*demo) {
      char* out = nullptr;
      check(vfxgb_codec_demo(demo_json ? 1 : 0, &out));
      std::cout << take(out);
      return 0;
    }
    if (*synth) {
      char* out = nullptr;
      check(vfxgb_synth_csv(n, d_ap, d_pp, synth_seed, &out));
      const std::string csv = take(out);
      if (synth_out.empty()) {
        std::cout << csv;
      } else if (!write_text(synth_out, csv)) {
        std::cerr << "error: cannot write " << synth_out << "\n";
        return 4;
      }
      return 0;
    }
  } catch (const Failure& f) {
    const char* msg = vfxgb_last_error();
    if (msg && *msg) std::cerr << "error (" << vfxgb_status_name(f.status) << "): " << msg << "\n";
    return exit_code(f.status);
  }
  return 1;
}
