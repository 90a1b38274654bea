#include "vfxgb/bigint.h"

#include <random>

#include "vfxgb/error.h"

namespace vfxgb {

std::size_t bit_length(const BigInt& value) {
  if (value == 0) return 0;
  return mpz_sizeinbase(value.get_mpz_t(), 2);
}

std::string to_hex(const BigInt& value, std::size_t min_width) {
  std::string out = value.get_str(16);
  if (out.size() < min_width) out.insert(0, min_width - out.size(), '0');
  return out;
}

BigInt from_hex(std::string_view hex) {
  if (hex.empty()) throw InvalidArgument("empty hex string");
  for (char c : hex) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
    if (!ok) throw InvalidArgument("invalid hex digit in '" + std::string(hex) + "'");
  }
  BigInt out;
  out.set_str(std::string(hex), 16);
  return out;
}

BigInt from_u64(std::uint64_t value) {
  BigInt out;
  mpz_import(out.get_mpz_t(), 1, 1, sizeof(value), 0, 0, &value);
  return out;
}

std::uint64_t to_u64(const BigInt& value) {
  if (value < 0 || bit_length(value) > 64) throw InvalidArgument("integer does not fit in 64 bits");
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, 1, sizeof(out), 0, 0, value.get_mpz_t());
  return out;
}

RandomSource::RandomSource(std::optional<std::uint64_t> seed) {
  gmp_randinit_mt(state_);
  live_ = true;
  std::uint64_t s = 0;
  if (seed) {
    s = *seed;
  } else {
    std::random_device rd;
    s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  gmp_randseed(state_, from_u64(s).get_mpz_t());
}

RandomSource::~RandomSource() {
  if (live_) gmp_randclear(state_);
}

RandomSource::RandomSource(RandomSource&& other) noexcept {
  gmp_randinit_set(state_, other.state_);
  live_ = true;
}

RandomSource& RandomSource::operator=(RandomSource&& other) noexcept {
  if (this != &other) {
    if (live_) gmp_randclear(state_);
    gmp_randinit_set(state_, other.state_);
    live_ = true;
  }
  return *this;
}

BigInt RandomSource::bits(std::size_t bits) {
  BigInt out;
  mpz_urandomb(out.get_mpz_t(), state_, bits);
  return out;
}

BigInt RandomSource::below(const BigInt& bound) {
  BigInt out;
  mpz_urandomm(out.get_mpz_t(), state_, bound.get_mpz_t());
  return out;
}

std::uint64_t RandomSource::next_u64() { return to_u64(bits(64)); }

}  // namespace vfxgb
