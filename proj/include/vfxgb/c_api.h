/* C interface to the vfxgb library. All functions return a vfxgb_status;
 * on failure vfxgb_last_error() describes the problem (per thread).
 * Strings returned through char** are owned by the caller and released
 * with vfxgb_string_free. Constructors set their handle to NULL on failure. */
#ifndef VFXGB_C_API_H
#define VFXGB_C_API_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VFXGB_API __declspec(dllexport)
#else
#define VFXGB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vfxgb_status {
  VFXGB_OK = 0,
  VFXGB_ERR_INVALID_ARGUMENT = 1,
  VFXGB_ERR_CONFIG = 2,
  VFXGB_ERR_OVERFLOW = 3,
  VFXGB_ERR_PROTOCOL = 4,
  VFXGB_ERR_IO = 5,
  VFXGB_ERR_CRYPTO = 6,
  VFXGB_ERR_INTERNAL = 7
} vfxgb_status;

typedef struct vfxgb_config vfxgb_config;
typedef struct vfxgb_run vfxgb_run;
typedef struct vfxgb_keypair vfxgb_keypair;
typedef struct vfxgb_codec vfxgb_codec;

VFXGB_API const char* vfxgb_version(void);
VFXGB_API const char* vfxgb_last_error(void);
VFXGB_API const char* vfxgb_status_name(vfxgb_status status);
VFXGB_API void vfxgb_string_free(char* s);

/* Run configuration (JSON document; see README for the schema). */
VFXGB_API vfxgb_status vfxgb_config_new(vfxgb_config** out);
VFXGB_API vfxgb_status vfxgb_config_from_json(const char* json, vfxgb_config** out);
VFXGB_API vfxgb_status vfxgb_config_from_file(const char* path, vfxgb_config** out);
/* Dotted key such as "xgb.trees"; value is JSON text or a bare string. */
VFXGB_API vfxgb_status vfxgb_config_set(vfxgb_config* cfg, const char* key, const char* value);
VFXGB_API vfxgb_status vfxgb_config_validate(const vfxgb_config* cfg);
VFXGB_API vfxgb_status vfxgb_config_to_json(const vfxgb_config* cfg, char** out);
VFXGB_API vfxgb_status vfxgb_config_out_dir(const vfxgb_config* cfg, char** out);
VFXGB_API void vfxgb_config_free(vfxgb_config* cfg);

/* Federated training followed by test-set evaluation. */
VFXGB_API vfxgb_status vfxgb_train(const vfxgb_config* cfg, vfxgb_run** out);
/* model.json, pp_lookup.json, metrics.json, ledger.json, resolved_config.json */
VFXGB_API vfxgb_status vfxgb_run_write(const vfxgb_run* run, const char* dir);
VFXGB_API vfxgb_status vfxgb_run_model_json(const vfxgb_run* run, char** out);
VFXGB_API vfxgb_status vfxgb_run_metrics_json(const vfxgb_run* run, char** out);
VFXGB_API vfxgb_status vfxgb_run_ledger_json(const vfxgb_run* run, char** out);
VFXGB_API vfxgb_status vfxgb_run_encryptions(const vfxgb_run* run, uint64_t* out);
VFXGB_API vfxgb_status vfxgb_run_test_auc(const vfxgb_run* run, double* out);
VFXGB_API void vfxgb_run_free(vfxgb_run* run);

/* Sweep over cfg's bench section; CSV table, or JSON lines when json_lines != 0. */
VFXGB_API vfxgb_status vfxgb_bench(const vfxgb_config* cfg, int json_lines, char** out);
VFXGB_API vfxgb_status vfxgb_codec_demo(int as_json, char** out);
VFXGB_API vfxgb_status vfxgb_synth_csv(size_t n, size_t d_ap, size_t d_pp, uint64_t seed, char** out);

/* Paillier. Plaintexts and ciphertexts are lowercase hex. */
VFXGB_API vfxgb_status vfxgb_keypair_generate(int key_bits, int seeded, uint64_t seed, vfxgb_keypair** out);
VFXGB_API vfxgb_status vfxgb_keypair_modulus(const vfxgb_keypair* kp, char** n_hex);
VFXGB_API vfxgb_status vfxgb_encrypt(const vfxgb_keypair* kp, const char* m_hex, char** ct_hex);
VFXGB_API vfxgb_status vfxgb_decrypt(const vfxgb_keypair* kp, const char* ct_hex, char** m_hex);
VFXGB_API vfxgb_status vfxgb_add(const vfxgb_keypair* kp, const char* a_hex, const char* b_hex, char** ct_hex);
VFXGB_API void vfxgb_keypair_free(vfxgb_keypair* kp);

/* Batch codec with d slots; shift holds d values. */
VFXGB_API vfxgb_status vfxgb_codec_new(int d, int r, int pad, const double* shift, double alpha, double alpha_max,
                                       vfxgb_codec** out);
VFXGB_API vfxgb_status vfxgb_codec_encode(const vfxgb_codec* c, const double* values, size_t count, char** z_hex);
/* values_out holds d entries; *overflow_out is set to 1 if any slot is flagged. */
VFXGB_API vfxgb_status vfxgb_codec_decode_sum(const vfxgb_codec* c, const char* z_hex, uint64_t n_terms,
                                              double* values_out, int* overflow_out);
VFXGB_API void vfxgb_codec_free(vfxgb_codec* c);

#ifdef __cplusplus
}
#endif

#endif
