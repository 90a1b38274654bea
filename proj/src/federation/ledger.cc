#include "vfxgb/federation/ledger.h"

#include <json.hpp>
#include <numeric>

namespace vfxgb::fed {
namespace {

using nlohmann::json;

json costs_json(const PartyCosts& c) {
  return {{"encryptions", c.encryptions},
          {"decryptions", c.decryptions},
          {"homomorphic_adds", c.homomorphic_adds},
          {"ciphertexts_sent", c.ciphertexts_sent},
          {"ciphertext_bytes_sent", c.ciphertext_bytes_sent},
          {"gradient_ciphertext_bytes", c.gradient_ciphertext_bytes},
          {"messages_sent", c.messages_sent},
          {"frame_bytes_sent", c.frame_bytes_sent},
          {"encode_below_shift", c.encode_below_shift},
          {"encode_truncated", c.encode_truncated},
          {"overflow_warnings", c.overflow_warnings},
          {"routing_queries", c.routing_queries},
          {"seconds",
           {{"encrypt", c.time.encrypt},
            {"aggregate", c.time.aggregate},
            {"transfer", c.time.transfer},
            {"decrypt", c.time.decrypt},
            {"tree_build", c.time.tree_build}}}};
}

}  // namespace

PartyCosts& PartyCosts::operator+=(const PartyCosts& o) {
  encryptions += o.encryptions;
  decryptions += o.decryptions;
  homomorphic_adds += o.homomorphic_adds;
  ciphertexts_sent += o.ciphertexts_sent;
  ciphertext_bytes_sent += o.ciphertext_bytes_sent;
  gradient_ciphertext_bytes += o.gradient_ciphertext_bytes;
  messages_sent += o.messages_sent;
  frame_bytes_sent += o.frame_bytes_sent;
  encode_below_shift += o.encode_below_shift;
  encode_truncated += o.encode_truncated;
  overflow_warnings += o.overflow_warnings;
  routing_queries += o.routing_queries;
  time.encrypt += o.time.encrypt;
  time.aggregate += o.time.aggregate;
  time.transfer += o.time.transfer;
  time.decrypt += o.time.decrypt;
  time.tree_build += o.time.tree_build;
  return *this;
}

std::string PartyCosts::to_json() const { return costs_json(*this).dump(); }

PartyCosts PartyCosts::from_json(const std::string& text) {
  const json j = json::parse(text);
  PartyCosts c;
  c.encryptions = j.value("encryptions", std::uint64_t{0});
  c.decryptions = j.value("decryptions", std::uint64_t{0});
  c.homomorphic_adds = j.value("homomorphic_adds", std::uint64_t{0});
  c.ciphertexts_sent = j.value("ciphertexts_sent", std::uint64_t{0});
  c.ciphertext_bytes_sent = j.value("ciphertext_bytes_sent", std::uint64_t{0});
  c.gradient_ciphertext_bytes = j.value("gradient_ciphertext_bytes", std::uint64_t{0});
  c.messages_sent = j.value("messages_sent", std::uint64_t{0});
  c.frame_bytes_sent = j.value("frame_bytes_sent", std::uint64_t{0});
  c.encode_below_shift = j.value("encode_below_shift", std::uint64_t{0});
  c.encode_truncated = j.value("encode_truncated", std::uint64_t{0});
  c.overflow_warnings = j.value("overflow_warnings", std::uint64_t{0});
  c.routing_queries = j.value("routing_queries", std::uint64_t{0});
  if (j.contains("seconds")) {
    const json& s = j["seconds"];
    c.time.encrypt = s.value("encrypt", 0.0);
    c.time.aggregate = s.value("aggregate", 0.0);
    c.time.transfer = s.value("transfer", 0.0);
    c.time.decrypt = s.value("decrypt", 0.0);
    c.time.tree_build = s.value("tree_build", 0.0);
  }
  return c;
}

double CostLedger::mean_tree_seconds() const {
  if (per_tree_seconds.empty()) return 0.0;
  return std::accumulate(per_tree_seconds.begin(), per_tree_seconds.end(), 0.0) /
         static_cast<double>(per_tree_seconds.size());
}

std::string CostLedger::to_json() const {
  json j = {{"encryptions", encryptions()},
            {"decryptions", decryptions()},
            {"homomorphic_adds", homomorphic_adds()},
            {"ciphertext_bytes", ciphertext_bytes()},
            {"gradient_ciphertext_bytes", gradient_ciphertext_bytes()},
            {"total_seconds", total_seconds},
            {"per_tree_seconds", per_tree_seconds},
            {"mean_tree_seconds", mean_tree_seconds()},
            {"active", costs_json(active)},
            {"passive", costs_json(passive)}};
  return j.dump(1);
}

}  // namespace vfxgb::fed
