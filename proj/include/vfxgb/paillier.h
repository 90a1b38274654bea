#pragma once

// Paillier additively homomorphic cryptosystem with g = n + 1.
//
// Key sizes 128 and 256 are accepted for tests and desk-scale benchmarks only;
// they offer no security.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "vfxgb/bigint.h"

namespace vfxgb::paillier {

inline constexpr int kMillerRabinRounds = 40;

bool is_supported_key_bits(int key_bits);

// Miller–Rabin with `rounds` random bases drawn from `rng`, after trial
// division by small primes.
bool is_probable_prime(const BigInt& candidate, RandomSource& rng,
                       int rounds = kMillerRabinRounds);

// Random prime with exactly `bits` bits and its two top bits set.
BigInt random_prime(std::size_t bits, RandomSource& rng);

class PublicKey {
 public:
  PublicKey() = default;
  explicit PublicKey(BigInt n);

  const BigInt& n() const { return n_; }
  const BigInt& n_squared() const { return n_squared_; }
  BigInt g() const { return n_ + 1; }
  int key_bits() const { return key_bits_; }
  std::uint64_t key_id() const { return key_id_; }
  // Serialized ciphertext width: 2 * key_bits bits.
  std::size_t ciphertext_bytes() const { return static_cast<std::size_t>(key_bits_) / 4; }
  std::size_t ciphertext_hex_width() const { return static_cast<std::size_t>(key_bits_) / 2; }

  // {"n": hex, "bits": int}
  std::string to_json() const;
  static PublicKey from_json(const std::string& json);

 private:
  BigInt n_;
  BigInt n_squared_;
  int key_bits_ = 0;
  std::uint64_t key_id_ = 0;
};

class PrivateKey {
 public:
  PrivateKey() = default;
  PrivateKey(PublicKey pk, BigInt lambda, BigInt mu)
      : pk_(std::move(pk)), lambda_(std::move(lambda)), mu_(std::move(mu)) {}

  const PublicKey& public_key() const { return pk_; }
  const BigInt& lambda() const { return lambda_; }
  const BigInt& mu() const { return mu_; }

 private:
  PublicKey pk_;
  BigInt lambda_;
  BigInt mu_;
};

struct Keypair {
  PublicKey pk;
  PrivateKey sk;
};

class Ciphertext {
 public:
  Ciphertext() = default;
  Ciphertext(BigInt value, std::uint64_t key_id) : value_(std::move(value)), key_id_(key_id) {}

  const BigInt& value() const { return value_; }
  std::uint64_t key_id() const { return key_id_; }

  // Fixed-width lowercase hex (key_bits / 2 characters).
  std::string to_hex(const PublicKey& pk) const;
  static Ciphertext from_hex(const PublicKey& pk, std::string_view hex);

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;

 private:
  BigInt value_;
  std::uint64_t key_id_ = 0;
};

// Throws ConfigError for unsupported key sizes. With a seed the result is a
// pure function of (key_bits, seed).
Keypair keygen(int key_bits, std::optional<std::uint64_t> rng_seed = std::nullopt);

// Requires 0 <= m < n.
Ciphertext encrypt(const PublicKey& pk, const BigInt& m, RandomSource& rng);

// Enc(0) with unit randomness: the identity element of add().
Ciphertext zero_ciphertext(const PublicKey& pk);

BigInt decrypt(const PrivateKey& sk, const Ciphertext& ct);

// Enc(a) ⊕ Enc(b) = Enc(a + b mod n).
Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

// In-place accumulation, avoids a temporary per addition.
void add_inplace(const PublicKey& pk, Ciphertext& acc, const Ciphertext& b);

}  // namespace vfxgb::paillier
