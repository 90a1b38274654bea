#include "vfxgb/c_api.h"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <new>
#include <string>

#include "vfxgb/batch_codec.h"
#include "vfxgb/error.h"
#include "vfxgb/paillier.h"
#include "vfxgb/runner.h"

struct vfxgb_config {
  vfxgb::run::RunConfig cfg;
};

struct vfxgb_run {
  vfxgb::run::TrainOutcome outcome;
};

struct vfxgb_keypair {
  vfxgb::paillier::Keypair keys;
  mutable vfxgb::RandomSource rng;
};

struct vfxgb_codec {
  vfxgb::codec::BatchConfig cfg;
};

namespace {

thread_local std::string last_error;

vfxgb_status fail(vfxgb_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
vfxgb_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return VFXGB_OK;
  } catch (const vfxgb::Error& e) {
    return fail(static_cast<vfxgb_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VFXGB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VFXGB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VFXGB_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw vfxgb::InvalidArgument(std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* vfxgb_version(void) { return "1.0.0"; }

const char* vfxgb_last_error(void) { return last_error.c_str(); }

const char* vfxgb_status_name(vfxgb_status status) {
  switch (status) {
    case VFXGB_OK: return "ok";
    case VFXGB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VFXGB_ERR_CONFIG: return "config error";
    case VFXGB_ERR_OVERFLOW: return "overflow";
    case VFXGB_ERR_PROTOCOL: return "protocol error";
    case VFXGB_ERR_IO: return "i/o error";
    case VFXGB_ERR_CRYPTO: return "crypto error";
    case VFXGB_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void vfxgb_string_free(char* s) { std::free(s); }

vfxgb_status vfxgb_config_new(vfxgb_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new vfxgb_config{};
  });
}

vfxgb_status vfxgb_config_from_json(const char* json, vfxgb_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    *out = new vfxgb_config{vfxgb::run::RunConfig::from_json(json)};
  });
}

vfxgb_status vfxgb_config_from_file(const char* path, vfxgb_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new vfxgb_config{vfxgb::run::RunConfig::from_file(path)};
  });
}

vfxgb_status vfxgb_config_set(vfxgb_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

vfxgb_status vfxgb_config_validate(const vfxgb_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->cfg.validate();
  });
}

vfxgb_status vfxgb_config_to_json(const vfxgb_config* cfg, char** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup(cfg->cfg.to_json());
  });
}

vfxgb_status vfxgb_config_out_dir(const vfxgb_config* cfg, char** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup(cfg->cfg.out);
  });
}

void vfxgb_config_free(vfxgb_config* cfg) { delete cfg; }

vfxgb_status vfxgb_train(const vfxgb_config* cfg, vfxgb_run** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = nullptr;
    *out = new vfxgb_run{vfxgb::run::train(cfg->cfg)};
  });
}

vfxgb_status vfxgb_run_write(const vfxgb_run* run, const char* dir) {
  return guarded([&] {
    need(run, "run");
    need(dir, "dir");
    vfxgb::run::write_outputs(run->outcome, dir);
  });
}

vfxgb_status vfxgb_run_model_json(const vfxgb_run* run, char** out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    *out = dup(vfxgb::xgb::model_to_json(run->outcome.model));
  });
}

vfxgb_status vfxgb_run_metrics_json(const vfxgb_run* run, char** out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    *out = dup(run->outcome.metrics.to_json());
  });
}

vfxgb_status vfxgb_run_ledger_json(const vfxgb_run* run, char** out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    *out = dup(run->outcome.ledger.to_json());
  });
}

vfxgb_status vfxgb_run_encryptions(const vfxgb_run* run, uint64_t* out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    *out = run->outcome.ledger.encryptions();
  });
}

vfxgb_status vfxgb_run_test_auc(const vfxgb_run* run, double* out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    *out = run->outcome.metrics.auc_test;
  });
}

void vfxgb_run_free(vfxgb_run* run) { delete run; }

vfxgb_status vfxgb_bench(const vfxgb_config* cfg, int json_lines, char** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    const auto rows = vfxgb::run::bench(cfg->cfg);
    *out = dup(json_lines ? vfxgb::run::bench_jsonl(rows) : vfxgb::run::bench_csv(rows));
  });
}

vfxgb_status vfxgb_codec_demo(int as_json, char** out) {
  return guarded([&] {
    need(out, "out");
    const auto demo = vfxgb::run::codec_demo();
    *out = dup(as_json ? demo.json + "\n" : demo.text);
  });
}

vfxgb_status vfxgb_synth_csv(size_t n, size_t d_ap, size_t d_pp, uint64_t seed, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(vfxgb::run::synth_csv(n, d_ap, d_pp, seed));
  });
}

vfxgb_status vfxgb_keypair_generate(int key_bits, int seeded, uint64_t seed, vfxgb_keypair** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto keys = seeded ? vfxgb::paillier::keygen(key_bits, seed) : vfxgb::paillier::keygen(key_bits);
    vfxgb::RandomSource rng(seeded ? std::optional<std::uint64_t>(seed ^ 0x6a09e667f3bcc909ULL) : std::nullopt);
    *out = new vfxgb_keypair{std::move(keys), std::move(rng)};
  });
}

vfxgb_status vfxgb_keypair_modulus(const vfxgb_keypair* kp, char** n_hex) {
  return guarded([&] {
    need(kp, "keypair");
    need(n_hex, "out");
    *n_hex = dup(vfxgb::to_hex(kp->keys.pk.n()));
  });
}

vfxgb_status vfxgb_encrypt(const vfxgb_keypair* kp, const char* m_hex, char** ct_hex) {
  return guarded([&] {
    need(kp, "keypair");
    need(m_hex, "plaintext");
    need(ct_hex, "out");
    const auto ct = vfxgb::paillier::encrypt(kp->keys.pk, vfxgb::from_hex(m_hex), kp->rng);
    *ct_hex = dup(ct.to_hex(kp->keys.pk));
  });
}

vfxgb_status vfxgb_decrypt(const vfxgb_keypair* kp, const char* ct_hex, char** m_hex) {
  return guarded([&] {
    need(kp, "keypair");
    need(ct_hex, "ciphertext");
    need(m_hex, "out");
    const auto ct = vfxgb::paillier::Ciphertext::from_hex(kp->keys.pk, ct_hex);
    *m_hex = dup(vfxgb::to_hex(vfxgb::paillier::decrypt(kp->keys.sk, ct)));
  });
}

vfxgb_status vfxgb_add(const vfxgb_keypair* kp, const char* a_hex, const char* b_hex, char** ct_hex) {
  return guarded([&] {
    need(kp, "keypair");
    need(a_hex, "a");
    need(b_hex, "b");
    need(ct_hex, "out");
    const auto& pk = kp->keys.pk;
    const auto sum = vfxgb::paillier::add(pk, vfxgb::paillier::Ciphertext::from_hex(pk, a_hex),
                                          vfxgb::paillier::Ciphertext::from_hex(pk, b_hex));
    *ct_hex = dup(sum.to_hex(pk));
  });
}

void vfxgb_keypair_free(vfxgb_keypair* kp) { delete kp; }

vfxgb_status vfxgb_codec_new(int d, int r, int pad, const double* shift, double alpha, double alpha_max,
                             vfxgb_codec** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    if (d < 1) throw vfxgb::ConfigError("codec: d must be >= 1");
    need(shift, "shift");
    vfxgb::codec::BatchConfig cfg;
    cfg.d = d;
    cfg.r = r;
    cfg.pad = pad;
    cfg.shift.assign(shift, shift + d);
    cfg.alpha = alpha;
    cfg.alpha_max = alpha_max;
    cfg.validate();
    *out = new vfxgb_codec{std::move(cfg)};
  });
}

vfxgb_status vfxgb_codec_encode(const vfxgb_codec* c, const double* values, size_t count, char** z_hex) {
  return guarded([&] {
    need(c, "codec");
    need(values, "values");
    need(z_hex, "out");
    const auto z = vfxgb::codec::encode(c->cfg, std::span<const double>(values, count));
    *z_hex = dup(vfxgb::to_hex(z.z));
  });
}

vfxgb_status vfxgb_codec_decode_sum(const vfxgb_codec* c, const char* z_hex, uint64_t n_terms, double* values_out,
                                    int* overflow_out) {
  return guarded([&] {
    need(c, "codec");
    need(z_hex, "z");
    need(values_out, "values_out");
    const auto d = vfxgb::codec::decode_sum(c->cfg, vfxgb::from_hex(z_hex), n_terms);
    for (std::size_t j = 0; j < d.values.size(); ++j) values_out[j] = d.values[j];
    if (overflow_out) *overflow_out = d.any_overflow() ? 1 : 0;
  });
}

void vfxgb_codec_free(vfxgb_codec* c) { delete c; }

}  // extern "C"
