#include "vfxgb/batch_codec.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vfxgb/error.h"

namespace vfxgb::codec {
namespace {

constexpr int kMaxInfoBits = 62;
constexpr int kMaxPadBits = 32;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void check_input(const BatchConfig& cfg, std::span<const double> m) {
  if (static_cast<int>(m.size()) != cfg.d) {
    throw InvalidArgument("expected " + std::to_string(cfg.d) + " values, got " +
                          std::to_string(m.size()));
  }
  for (double v : m) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite value passed to encoder");
  }
}

BigInt low_bits(const BigInt& v, int bits) {
  BigInt out;
  mpz_fdiv_r_2exp(out.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
  return out;
}

BigInt shift_right(const BigInt& v, int bits) {
  BigInt out;
  mpz_fdiv_q_2exp(out.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
  return out;
}

long double to_long_double(const BigInt& v) {
  if (bit_length(v) <= 64) return static_cast<long double>(to_u64(v));
  return static_cast<long double>(v.get_d());
}

// Splits z into d fields of `width` bits, slot 1 first. Returns true when z
// does not fit in d * width bits.
bool split_fields(const BigInt& z, int d, int width, std::vector<BigInt>& fields) {
  fields.assign(static_cast<std::size_t>(d), BigInt(0));
  BigInt rest = z;
  for (int j = d - 1; j >= 0; --j) {
    fields[static_cast<std::size_t>(j)] = low_bits(rest, width);
    rest = shift_right(rest, width);
  }
  return rest != 0;
}

}  // namespace

double BatchConfig::resolution() const { return std::ldexp(alpha_max, -r); }

void BatchConfig::validate() const {
  if (d < 1) throw ConfigError("codec: d must be >= 1");
  if (r < 1 || r > kMaxInfoBits) throw ConfigError("codec: r must be in [1, 62]");
  if (pad < 1 || pad > kMaxPadBits) throw ConfigError("codec: pad must be in [1, 32]");
  if (static_cast<int>(shift.size()) != d) throw ConfigError("codec: shift must have d entries");
  for (double s : shift) {
    if (!std::isfinite(s) || s > 0.0) throw ConfigError("codec: every shift s_j must be finite and <= 0");
  }
  if (!std::isfinite(alpha) || !std::isfinite(alpha_max) || !(alpha > 0.0) || alpha > alpha_max) {
    throw ConfigError("codec: require 0 < alpha <= alpha_max");
  }
}

void BatchConfig::validate_for_key(int key_bits) const {
  validate();
  if (total_bits() > key_bits - 1) {
    throw ConfigError("codec: d*(r+pad) = " + std::to_string(total_bits()) +
                      " bits does not fit a " + std::to_string(key_bits) + "-bit key");
  }
}

BatchConfig BatchConfig::single_slot(int j) const {
  BatchConfig out = *this;
  out.d = 1;
  out.shift = {shift.at(static_cast<std::size_t>(j))};
  return out;
}

std::uint64_t BatchConfig::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  fnv_mix(h, &d, sizeof d);
  fnv_mix(h, &r, sizeof r);
  fnv_mix(h, &pad, sizeof pad);
  for (double s : shift) fnv_mix(h, &s, sizeof s);
  fnv_mix(h, &alpha, sizeof alpha);
  fnv_mix(h, &alpha_max, sizeof alpha_max);
  return h;
}

bool DecodedSum::any_overflow() const {
  for (bool f : overflow_flags) {
    if (f) return true;
  }
  return false;
}

std::uint64_t quantize(const BatchConfig& cfg, double shifted) {
  const long double scaled =
      std::ldexp(static_cast<long double>(shifted), cfg.r) / static_cast<long double>(cfg.alpha_max);
  return static_cast<std::uint64_t>(std::floor(scaled + 0.5L));
}

BigInt pack(const BatchConfig& cfg, std::span<const std::uint64_t> q) {
  BigInt z = 0;
  for (std::uint64_t v : q) {
    mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(cfg.slot_bits()));
    z += from_u64(v);
  }
  return z;
}

BatchedPlaintext encode(const BatchConfig& cfg, std::span<const double> m, EncodeStats* stats) {
  check_input(cfg, m);
  std::vector<std::uint64_t> q(static_cast<std::size_t>(cfg.d));
  for (std::size_t j = 0; j < q.size(); ++j) {
    double u = m[j] - cfg.shift[j];
    if (u < 0.0) {
      u = 0.0;
      if (stats) ++stats->below_shift;
    }
    if (u > cfg.alpha) {
      u = cfg.alpha;
      if (stats) ++stats->truncated;
    }
    q[j] = quantize(cfg, u);
  }
  return BatchedPlaintext{pack(cfg, q), cfg.fingerprint()};
}

BatchedPlaintext aggregate_plain(const BatchConfig& cfg, std::span<const BatchedPlaintext> zs) {
  const std::uint64_t fp = cfg.fingerprint();
  BatchedPlaintext out{BigInt(0), fp};
  for (const auto& z : zs) {
    if (z.config_fingerprint != fp) throw InvalidArgument("aggregate_plain: mixed codec configurations");
    out.z += z.z;
  }
  return out;
}

DecodedSum decode_sum(const BatchConfig& cfg, const BigInt& z_sum, std::uint64_t n_terms) {
  if (n_terms < 1) throw InvalidArgument("decode_sum: n_terms must be >= 1");
  if (z_sum < 0) throw InvalidArgument("decode_sum: negative aggregate");
  DecodedSum out;
  out.n_terms = n_terms;
  const bool carry_out = split_fields(z_sum, cfg.d, cfg.slot_bits(), out.slot_sums);
  const BigInt threshold = from_u64(overflow_threshold(cfg));
  const long double step = std::ldexp(static_cast<long double>(cfg.alpha_max), -cfg.r);
  for (int j = 0; j < cfg.d; ++j) {
    const BigInt& field = out.slot_sums[static_cast<std::size_t>(j)];
    const long double shifted_sum = to_long_double(field) * step;
    const long double shift_back = static_cast<long double>(n_terms) * cfg.shift[static_cast<std::size_t>(j)];
    out.values.push_back(static_cast<double>(shifted_sum + shift_back));
    out.overflow_flags.push_back(field >= threshold || (j == 0 && carry_out));
    out.protection_bits.push_back(to_u64(shift_right(field, cfg.r)));
  }
  return out;
}

std::uint64_t overflow_threshold(const BatchConfig& cfg) {
  return (std::uint64_t{1} << cfg.r) + (std::uint64_t{1} << (cfg.r + 1));
}

NoOverflowConditions no_overflow_sufficient(const BatchConfig& cfg, std::uint64_t n_terms) {
  if (n_terms < 1) throw InvalidArgument("no_overflow_sufficient: n_terms must be >= 1");
  const long double two_r = std::ldexp(1.0L, cfg.r);
  const long double n = static_cast<long double>(n_terms);
  const long double per_term = two_r * static_cast<long double>(cfg.alpha) /
                                   static_cast<long double>(cfg.alpha_max) +
                               0.5L;
  NoOverflowConditions out;
  out.strict = n * per_term < 3.0L * two_r;
  out.loose = n * static_cast<long double>(cfg.alpha) < static_cast<long double>(cfg.alpha_max);
  return out;
}

double precision_bound(const BatchConfig& cfg, std::uint64_t n_terms, double truncation_excess) {
  if (truncation_excess < 0.0) throw InvalidArgument("precision_bound: truncation_excess must be >= 0");
  return static_cast<double>(n_terms) / 2.0 * cfg.resolution() + truncation_excess;
}

BatchedPlaintext signed_encode(const BatchConfig& cfg, std::span<const double> m) {
  check_input(cfg, m);
  const int value_bits = cfg.r + 1;
  const int width = value_bits + cfg.pad;
  const std::int64_t limit = (std::int64_t{1} << cfg.r) - 1;
  BigInt z = 0;
  for (double v : m) {
    const double t = std::clamp(v, -cfg.alpha, cfg.alpha);
    const long double scaled =
        std::ldexp(static_cast<long double>(t), cfg.r) / static_cast<long double>(cfg.alpha_max);
    std::int64_t q = static_cast<std::int64_t>(std::floor(scaled + 0.5L));
    q = std::clamp(q, -limit, limit);
    // two's complement in value_bits bits
    const std::uint64_t field =
        static_cast<std::uint64_t>(q) & ((std::uint64_t{1} << value_bits) - 1);
    mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(width));
    z += from_u64(field);
  }
  return BatchedPlaintext{z, cfg.fingerprint() ^ 0x5157ULL};
}

DecodedSum signed_decode_sum(const BatchConfig& cfg, const BigInt& z_sum, std::uint64_t n_terms) {
  if (n_terms < 1) throw InvalidArgument("signed_decode_sum: n_terms must be >= 1");
  const int value_bits = cfg.r + 1;
  const int width = value_bits + cfg.pad;
  DecodedSum out;
  out.n_terms = n_terms;
  const bool carry_out = split_fields(z_sum, cfg.d, width, out.slot_sums);
  const std::uint64_t all_ones = (std::uint64_t{1} << cfg.pad) - 1;
  const long double step = std::ldexp(static_cast<long double>(cfg.alpha_max), -cfg.r);
  for (int j = 0; j < cfg.d; ++j) {
    const BigInt& field = out.slot_sums[static_cast<std::size_t>(j)];
    const std::uint64_t low = to_u64(low_bits(field, value_bits));
    std::int64_t q = static_cast<std::int64_t>(low);
    if (low >= (std::uint64_t{1} << cfg.r)) q -= std::int64_t{1} << value_bits;
    out.values.push_back(static_cast<double>(static_cast<long double>(q) * step));
    const std::uint64_t prot = to_u64(shift_right(field, value_bits));
    out.protection_bits.push_back(prot);
    out.overflow_flags.push_back(prot == all_ones || (j == 0 && carry_out));
  }
  return out;
}

std::string field_bits(const BigInt& value, int width) {
  std::string out(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if (mpz_tstbit(value.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
      out[static_cast<std::size_t>(width - 1 - i)] = '1';
    }
  }
  return out;
}

}  // namespace vfxgb::codec
