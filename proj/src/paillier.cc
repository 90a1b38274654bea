#include "vfxgb/paillier.h"

#include <array>
#include <json.hpp>

#include "vfxgb/error.h"

namespace vfxgb::paillier {
namespace {

constexpr std::array<unsigned, 54> kSmallPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251};

std::uint64_t fingerprint(const BigInt& n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : n.get_str(16)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

void require_same_key(std::uint64_t expected, std::uint64_t actual) {
  if (expected != actual) throw CryptoError("ciphertext key_id does not match the key in use");
}

}  // namespace

bool is_supported_key_bits(int key_bits) {
  return key_bits == 128 || key_bits == 256 || key_bits == 512 || key_bits == 1024 ||
         key_bits == 2048;
}

bool is_probable_prime(const BigInt& candidate, RandomSource& rng, int rounds) {
  if (candidate < 2) return false;
  for (unsigned p : kSmallPrimes) {
    if (candidate == p) return true;
    if (mpz_divisible_ui_p(candidate.get_mpz_t(), p)) return false;
  }
  // candidate - 1 = d * 2^s with d odd
  const BigInt n_minus_1 = candidate - 1;
  BigInt d = n_minus_1;
  std::size_t s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);

  const BigInt base_range = candidate - 3;
  BigInt x;
  for (int round = 0; round < rounds; ++round) {
    BigInt a = rng.below(base_range) + 2;  // a in [2, n-2]
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), candidate.get_mpz_t());
    if (x == 1 || x == n_minus_1) continue;
    bool witness = true;
    for (std::size_t i = 1; i < s; ++i) {
      mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), 2, candidate.get_mpz_t());
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

BigInt random_prime(std::size_t bits, RandomSource& rng) {
  if (bits < 8) throw InvalidArgument("prime size too small");
  for (;;) {
    BigInt c = rng.bits(bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    if (is_probable_prime(c, rng)) return c;
  }
}

PublicKey::PublicKey(BigInt n)
    : n_(std::move(n)),
      n_squared_(n_ * n_),
      key_bits_(static_cast<int>(bit_length(n_))),
      key_id_(fingerprint(n_)) {}

std::string PublicKey::to_json() const {
  nlohmann::json j = {{"n", to_hex(n_)}, {"bits", key_bits_}};
  return j.dump();
}

PublicKey PublicKey::from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("public key json: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("bits")) throw InvalidArgument("public key json needs n and bits");
  PublicKey pk(from_hex(j["n"].get<std::string>()));
  if (pk.key_bits() != j["bits"].get<int>()) throw InvalidArgument("public key bit length mismatch");
  return pk;
}

std::string Ciphertext::to_hex(const PublicKey& pk) const {
  require_same_key(pk.key_id(), key_id_);
  return vfxgb::to_hex(value_, pk.ciphertext_hex_width());
}

Ciphertext Ciphertext::from_hex(const PublicKey& pk, std::string_view hex) {
  BigInt v = vfxgb::from_hex(hex);
  if (v >= pk.n_squared()) throw CryptoError("ciphertext out of range");
  return Ciphertext(std::move(v), pk.key_id());
}

Keypair keygen(int key_bits, std::optional<std::uint64_t> rng_seed) {
  if (!is_supported_key_bits(key_bits)) {
    throw ConfigError("unsupported key_bits " + std::to_string(key_bits) +
                      " (allowed: 128, 256, 512, 1024, 2048)");
  }
  RandomSource rng(rng_seed);
  const std::size_t half = static_cast<std::size_t>(key_bits) / 2;
  for (;;) {
    BigInt p = random_prime(half, rng);
    BigInt q = random_prime(half, rng);
    if (p == q) continue;
    BigInt n = p * q;
    if (bit_length(n) != static_cast<std::size_t>(key_bits)) continue;
    BigInt pm1 = p - 1;
    BigInt qm1 = q - 1;
    BigInt lambda;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    BigInt mu;
    // With g = n + 1, L(g^lambda mod n^2) = lambda mod n.
    if (mpz_invert(mu.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t()) == 0) continue;
    PublicKey pk(std::move(n));
    PrivateKey sk(pk, std::move(lambda), std::move(mu));
    return Keypair{std::move(pk), std::move(sk)};
  }
}

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, RandomSource& rng) {
  if (m < 0 || m >= pk.n()) throw InvalidArgument("plaintext out of range [0, n)");
  BigInt r;
  BigInt g;
  do {
    r = rng.below(pk.n());
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n().get_mpz_t());
  } while (r == 0 || g != 1);
  // (1 + m n) * r^n mod n^2
  BigInt c;
  mpz_powm(c.get_mpz_t(), r.get_mpz_t(), pk.n().get_mpz_t(), pk.n_squared().get_mpz_t());
  BigInt gm = m * pk.n() + 1;
  c *= gm;
  mpz_mod(c.get_mpz_t(), c.get_mpz_t(), pk.n_squared().get_mpz_t());
  return Ciphertext(std::move(c), pk.key_id());
}

Ciphertext zero_ciphertext(const PublicKey& pk) { return Ciphertext(BigInt(1), pk.key_id()); }

BigInt decrypt(const PrivateKey& sk, const Ciphertext& ct) {
  const PublicKey& pk = sk.public_key();
  require_same_key(pk.key_id(), ct.key_id());
  BigInt x;
  mpz_powm(x.get_mpz_t(), ct.value().get_mpz_t(), sk.lambda().get_mpz_t(),
           pk.n_squared().get_mpz_t());
  x -= 1;
  mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), pk.n().get_mpz_t());
  x *= sk.mu();
  mpz_mod(x.get_mpz_t(), x.get_mpz_t(), pk.n().get_mpz_t());
  return x;
}

Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  Ciphertext out = a;
  add_inplace(pk, out, b);
  return out;
}

void add_inplace(const PublicKey& pk, Ciphertext& acc, const Ciphertext& b) {
  require_same_key(pk.key_id(), acc.key_id());
  require_same_key(pk.key_id(), b.key_id());
  BigInt v = acc.value() * b.value();
  mpz_mod(v.get_mpz_t(), v.get_mpz_t(), pk.n_squared().get_mpz_t());
  acc = Ciphertext(std::move(v), acc.key_id());
}

}  // namespace vfxgb::paillier
