#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfxgb/batch_codec.h"
#include "vfxgb/data.h"
#include "vfxgb/federation/ledger.h"
#include "vfxgb/federation/messages.h"
#include "vfxgb/federation/transport.h"
#include "vfxgb/paillier.h"
#include "vfxgb/xgb_core.h"

namespace vfxgb::fed {

enum class OverflowPolicy { kAbort, kWarn };

struct FederationConfig {
  GradientMode mode = GradientMode::kBatched;
  codec::BatchConfig codec;
  xgb::TreeParams params;
  int key_bits = 256;
  std::uint64_t seed = 42;
  OverflowPolicy overflow = OverflowPolicy::kAbort;
  // Gradient source per boosting round; logistic loss when empty.
  xgb::GradientFn gradient_fn;

  void validate() const;  // throws ConfigError
};

struct TrainingResult {
  xgb::BoostedModel model;
  CostLedger ledger;
  std::vector<double> train_scores;
};

// Encodes and encrypts gradients: one ciphertext per instance in batched
// mode, (g, h) as two single-slot ciphertexts in per-value mode.
EncryptedGradients prepare_gradients(std::span<const xgb::GradientPair> gradients, GradientMode mode,
                                     const codec::BatchConfig& cfg, const paillier::PublicKey& pk,
                                     RandomSource& rng, PartyCosts& costs, int tree_index = 0);

// Decrypts and decodes one feature histogram into per-bucket (G, H, count).
// Empty buckets are not decrypted. Overflow handling follows `policy`;
// `where` prefixes the diagnostic.
std::vector<xgb::BucketStats> decode_histogram(const FeatureHistogram& hist, GradientMode mode,
                                               const codec::BatchConfig& cfg, const paillier::PrivateKey& sk,
                                               OverflowPolicy policy, PartyCosts& costs,
                                               const std::string& where = {});

struct RemoteSplitCandidate {
  double gain = xgb::kNoSplit;
  int feature = -1;
  int threshold_index = -1;
  bool valid() const { return feature >= 0; }
};

// Best split over the Passive Party's features from its encrypted histograms.
RemoteSplitCandidate evaluate_remote_splits(const AggregatedHistograms& histograms, GradientMode mode,
                                            const codec::BatchConfig& cfg, const paillier::PrivateKey& sk,
                                            const xgb::BucketStats& node_totals, double lambda, double gamma,
                                            OverflowPolicy policy, PartyCosts& costs,
                                            const std::string& where = {});

// Label holder. Drives the protocol over one channel per Passive Party
// (channel p talks to party p + 1).
class ActiveParty {
 public:
  ActiveParty(data::PartyView view, FederationConfig config);

  TrainingResult train(std::span<Channel* const> passive);

  // Routes each row through the model, asking the owning Passive Party for
  // its splits. A Done exchange closes the session only if any query was sent.
  std::vector<double> predict(const xgb::BoostedModel& model, const xgb::FeatureMatrix& features,
                              std::span<Channel* const> passive, PartyCosts* costs = nullptr);

  const paillier::PublicKey& public_key() const { return keys_->pk; }

 private:
  xgb::Tree build_tree(int tree_index, std::span<const xgb::GradientPair> gradients,
                       std::span<Channel* const> passive, std::vector<int>& leaf_of);

  data::PartyView view_;
  FederationConfig config_;
  std::optional<paillier::Keypair> keys_;
  std::vector<xgb::FeatureBins> bins_;
  std::vector<std::vector<int>> passive_buckets_;
  PartyCosts costs_;
};

}  // namespace vfxgb::fed
