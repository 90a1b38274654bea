#pragma once

// Wires an Active Party to its Passive Parties over a chosen channel kind and
// runs training or federated inference end to end.

#include <cstdint>
#include <atomic>
#include <exception>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "vfxgb/data.h"
#include "vfxgb/federation/active_party.h"
#include "vfxgb/federation/passive_party.h"
#include "vfxgb/federation/transport.h"

namespace vfxgb::fed {

struct ChannelSpec {
  enum class Kind { kLockstep, kThreaded, kTcp };
  Kind kind = Kind::kLockstep;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port

  // "inproc" / "lockstep", "queue" / "threads", "tcp", "tcp:HOST:PORT".
  static ChannelSpec parse(const std::string& text);
  std::string to_string() const;
};

class FederatedSession {
 public:
  // party index, direction as seen from the Active Party, payload
  using TraceFn = std::function<void(int party, Direction direction, const std::string& payload)>;

  FederatedSession(data::PartyView active, std::vector<data::PartyView> passive, FederationConfig config,
                   ChannelSpec channel = {});
  ~FederatedSession();
  FederatedSession(const FederatedSession&) = delete;
  FederatedSession& operator=(const FederatedSession&) = delete;

  void set_trace(TraceFn trace);

  TrainingResult train();

  // Passive Parties switch to `passive_features` (one matrix per party, rows
  // aligned with `active_features`) for the duration of the call.
  std::vector<double> predict(const xgb::BoostedModel& model, const xgb::FeatureMatrix& active_features,
                              const std::vector<xgb::FeatureMatrix>& passive_features,
                              PartyCosts* costs = nullptr);

  std::size_t num_passive() const { return passive_.size(); }
  const PassiveParty& passive_party(std::size_t p) const { return *passive_[p]; }
  PassiveParty& passive_party(std::size_t p) { return *passive_[p]; }

 private:
  void start_threads();
  void shutdown();
  void rethrow_passive_failure();

  ChannelSpec spec_;
  ActiveParty active_;
  std::vector<std::unique_ptr<PassiveParty>> passive_;
  std::vector<xgb::FeatureMatrix> training_features_;
  std::vector<std::unique_ptr<Transport>> ap_side_;
  std::vector<std::unique_ptr<Transport>> pp_side_;
  std::vector<std::unique_ptr<Channel>> channels_;
  std::vector<std::thread> threads_;
  std::vector<std::exception_ptr> failures_;
  std::atomic<bool> stopping_{false};
};

}  // namespace vfxgb::fed
