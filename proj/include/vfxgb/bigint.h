#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace vfxgb {

using BigInt = mpz_class;

// Number of significant bits; 0 for zero.
std::size_t bit_length(const BigInt& value);

// Lowercase big-endian hex, left-padded with zeros to at least `min_width`
// characters.
std::string to_hex(const BigInt& value, std::size_t min_width = 0);

// Accepts lowercase or uppercase hex digits without prefix. Throws
// InvalidArgument on empty input or foreign characters.
BigInt from_hex(std::string_view hex);

BigInt from_u64(std::uint64_t value);
std::uint64_t to_u64(const BigInt& value);  // requires value < 2^64

// Seedable randomness source over GMP's Mersenne Twister. Not thread-safe;
// give each thread its own instance.
class RandomSource {
 public:
  explicit RandomSource(std::optional<std::uint64_t> seed = std::nullopt);
  ~RandomSource();
  RandomSource(const RandomSource&) = delete;
  RandomSource& operator=(const RandomSource&) = delete;
  RandomSource(RandomSource&& other) noexcept;
  RandomSource& operator=(RandomSource&& other) noexcept;

  // Uniform integer with exactly `bits` random bits (value < 2^bits).
  BigInt bits(std::size_t bits);
  // Uniform integer in [0, bound).
  BigInt below(const BigInt& bound);
  std::uint64_t next_u64();

 private:
  gmp_randstate_t state_;
  bool live_ = false;
};

}  // namespace vfxgb
