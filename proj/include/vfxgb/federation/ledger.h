#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vfxgb::fed {

struct PhaseTimes {
  double encrypt = 0.0;     // encode + encrypt gradients
  double aggregate = 0.0;   // homomorphic bucket sums
  double transfer = 0.0;    // payload serialization and parsing
  double decrypt = 0.0;     // decrypt + decode aggregates
  double tree_build = 0.0;  // plaintext histograms, gains, partitions
};

struct PartyCosts {
  std::uint64_t encryptions = 0;
  std::uint64_t decryptions = 0;
  std::uint64_t homomorphic_adds = 0;
  std::uint64_t ciphertexts_sent = 0;
  std::uint64_t ciphertext_bytes_sent = 0;
  // Subset of ciphertext_bytes_sent carrying encrypted gradients to the PPs.
  std::uint64_t gradient_ciphertext_bytes = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t frame_bytes_sent = 0;
  std::uint64_t encode_below_shift = 0;
  std::uint64_t encode_truncated = 0;
  std::uint64_t overflow_warnings = 0;
  std::uint64_t routing_queries = 0;
  PhaseTimes time;

  PartyCosts& operator+=(const PartyCosts& other);
  std::string to_json() const;
  static PartyCosts from_json(const std::string& json);
};

struct CostLedger {
  PartyCosts active;
  PartyCosts passive;  // summed over all Passive Parties
  std::vector<double> per_tree_seconds;
  double total_seconds = 0.0;

  std::uint64_t encryptions() const { return active.encryptions + passive.encryptions; }
  std::uint64_t decryptions() const { return active.decryptions + passive.decryptions; }
  std::uint64_t homomorphic_adds() const { return active.homomorphic_adds + passive.homomorphic_adds; }
  std::uint64_t ciphertext_bytes() const { return active.ciphertext_bytes_sent + passive.ciphertext_bytes_sent; }
  std::uint64_t gradient_ciphertext_bytes() const { return active.gradient_ciphertext_bytes; }
  double mean_tree_seconds() const;

  std::string to_json() const;
};

}  // namespace vfxgb::fed
