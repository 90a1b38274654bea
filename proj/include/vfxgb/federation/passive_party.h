#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfxgb/federation/ledger.h"
#include "vfxgb/federation/messages.h"
#include "vfxgb/federation/transport.h"
#include "vfxgb/paillier.h"
#include "vfxgb/xgb_core.h"

namespace vfxgb::fed {

// Private to the Passive Party: what each lookup id handed to the Active
// Party refers to.
struct LookupEntry {
  std::uint64_t lookup_id = 0;
  int feature = 0;
  int threshold_index = 0;
  double threshold = 0.0;
};

// Feature-only participant. Bins its columns locally, sums encrypted
// gradients per bucket for the node instance sets it is sent, records the
// splits it owns, and answers routing queries at inference time.
class PassiveParty {
 public:
  PassiveParty(xgb::FeatureMatrix features, int num_buckets, int party_id = 1);

  // Handles one request; protocol violations produce an ErrorReply.
  Message handle(const Message& request);
  std::string handle_payload(const std::string& payload);

  // Serves requests until a Done request has been answered.
  void serve(Transport& transport);

  // Rows addressed by routing queries; defaults to the training features.
  void set_inference_features(xgb::FeatureMatrix features);

  int party_id() const { return party_id_; }
  const std::vector<LookupEntry>& lookup_table() const { return lookup_; }
  std::string lookup_table_json() const;
  void load_lookup_table_json(const std::string& json);
  const PartyCosts& costs() const { return costs_; }
  const std::vector<xgb::FeatureBins>& bins() const { return bins_; }

 private:
  std::string respond(const std::string& payload, bool* done);
  MessageBody dispatch(const MessageBody& body);
  MessageBody on_public_key(const PublicKeyMsg& m);
  MessageBody on_gradients(const EncryptedGradients& m);
  MessageBody on_aggregate(const AggregateRequest& m);
  MessageBody on_split(const SplitDecision& m);
  MessageBody on_route(const RoutingQuery& m);
  MessageBody on_done();

  xgb::FeatureMatrix features_;
  std::optional<xgb::FeatureMatrix> inference_features_;
  std::vector<xgb::FeatureBins> bins_;
  int party_id_;
  std::uint64_t next_seq_ = 0;

  std::optional<paillier::PublicKey> pk_;
  GradientMode mode_ = GradientMode::kBatched;
  std::vector<paillier::Ciphertext> gradients_;
  std::map<int, std::vector<std::uint32_t>> node_rows_;
  std::vector<LookupEntry> lookup_;
  PartyCosts costs_;
};

}  // namespace vfxgb::fed
