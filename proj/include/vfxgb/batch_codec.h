#pragma once

// Batch codec packing d real values into one non-negative integer so a single
// Paillier encryption and a single homomorphic addition cover all of them.
//
// Encoding per slot j: shift (u = m - s_j, clamped at 0), truncate
// (u = min(u, alpha)), quantize (q = floor(2^r * u / alpha_max + 1/2)), then
// pack q into an (r + pad)-bit field. Slot 1 is the most significant field.
// Decoding of a sum of n encodings: extract each field, de-quantize
// (q_sum * alpha_max / 2^r) and shift back (+ n * s_j).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vfxgb/bigint.h"

namespace vfxgb::codec {

struct BatchConfig {
  int d = 2;                    // slots per plaintext
  int r = 30;                   // information bits per slot
  int pad = 2;                  // overflow-protection bits per slot
  std::vector<double> shift{-10.0, -10.0};  // s_j <= 0
  double alpha = 20.0;          // truncation ceiling
  double alpha_max = 1e6;       // quantization range

  int slot_bits() const { return r + pad; }
  int total_bits() const { return d * (r + pad); }
  // alpha_max / 2^r
  double resolution() const;

  // Throws ConfigError naming the violated invariant.
  void validate() const;
  // Throws ConfigError unless total_bits() <= key_bits - 1.
  void validate_for_key(int key_bits) const;

  // Same quantizer restricted to slot j (d = 1); used by the per-value
  // baseline so both modes share quantization.
  BatchConfig single_slot(int j) const;

  std::uint64_t fingerprint() const;

  friend bool operator==(const BatchConfig&, const BatchConfig&) = default;
};

struct BatchedPlaintext {
  BigInt z;
  std::uint64_t config_fingerprint = 0;
};

struct DecodedSum {
  std::vector<double> values;             // estimated sum per slot
  std::uint64_t n_terms = 0;
  std::vector<bool> overflow_flags;       // per slot
  std::vector<BigInt> slot_sums;          // raw extracted fields
  std::vector<std::uint64_t> protection_bits;  // top `pad` bits of each field

  bool any_overflow() const;
};

// Saturation bookkeeping; encode() adds to it when given one.
struct EncodeStats {
  std::uint64_t below_shift = 0;  // m_j < s_j, clamped to u = 0
  std::uint64_t truncated = 0;    // u_j > alpha, clamped to alpha
};

// Quantized value of one already-shifted, non-negative input.
std::uint64_t quantize(const BatchConfig& cfg, double shifted);

BatchedPlaintext encode(const BatchConfig& cfg, std::span<const double> m,
                        EncodeStats* stats = nullptr);

// Packs already-quantized slot values (each < 2^(r+pad)).
BigInt pack(const BatchConfig& cfg, std::span<const std::uint64_t> q);

BatchedPlaintext aggregate_plain(const BatchConfig& cfg, std::span<const BatchedPlaintext> zs);

DecodedSum decode_sum(const BatchConfig& cfg, const BigInt& z_sum, std::uint64_t n_terms);

// 2^r + 2^(r+1): a slot sum at or above this value is flagged.
std::uint64_t overflow_threshold(const BatchConfig& cfg);

struct NoOverflowConditions {
  bool strict = false;  // n * (2^r * alpha / alpha_max + 1/2) < 3 * 2^r
  bool loose = false;   // n * alpha < alpha_max
};

NoOverflowConditions no_overflow_sufficient(const BatchConfig& cfg, std::uint64_t n_terms);

// (n/2) * alpha_max / 2^r + truncation_excess
double precision_bound(const BatchConfig& cfg, std::uint64_t n_terms, double truncation_excess);

// BatchCrypt-style reference codec: truncate to [-alpha, alpha], quantize to
// (r+1)-bit two's complement, pack with `pad` protection bits. Kept to
// demonstrate the carry that sums of negative values cause.
BatchedPlaintext signed_encode(const BatchConfig& cfg, std::span<const double> m);
DecodedSum signed_decode_sum(const BatchConfig& cfg, const BigInt& z_sum, std::uint64_t n_terms);

// Binary rendering of a slot field, most significant bit first.
std::string field_bits(const BigInt& value, int width);

}  // namespace vfxgb::codec
