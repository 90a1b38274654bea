#include "vfxgb/federation/passive_party.h"

#include <chrono>
#include <json.hpp>

#include "vfxgb/error.h"

namespace vfxgb::fed {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

PassiveParty::PassiveParty(xgb::FeatureMatrix features, int num_buckets, int party_id)
    : features_(std::move(features)), party_id_(party_id) {
  if (features_.num_features() > 0) bins_ = xgb::bin_all(features_, num_buckets);
}

void PassiveParty::set_inference_features(xgb::FeatureMatrix features) {
  if (features.num_features() != features_.num_features()) {
    throw InvalidArgument("inference features do not match the training columns");
  }
  inference_features_ = std::move(features);
}

Message PassiveParty::handle(const Message& request) {
  MessageBody reply;
  try {
    reply = dispatch(request.body);
  } catch (const Error& e) {
    reply = ErrorReply{e.what()};
  }
  return Message{next_seq_++, request.seq, std::move(reply)};
}

std::string PassiveParty::handle_payload(const std::string& payload) { return respond(payload, nullptr); }

std::string PassiveParty::respond(const std::string& payload, bool* done) {
  Message request;
  try {
    request = decode_payload(payload);
  } catch (const Error& e) {
    return encode_payload(Message{next_seq_++, std::nullopt, ErrorReply{e.what()}});
  }
  if (done) *done = std::holds_alternative<Done>(request.body);
  const Message reply = handle(request);
  auto start = Clock::now();
  std::string out = encode_payload(reply);
  costs_.time.transfer += seconds_since(start);
  ++costs_.messages_sent;
  costs_.frame_bytes_sent += out.size() + 4;
  return out;
}

void PassiveParty::serve(Transport& transport) {
  for (;;) {
    const std::string payload = transport.receive();
    bool done = false;
    std::string reply = respond(payload, &done);
    transport.send(std::move(reply));
    if (done) return;
  }
}

MessageBody PassiveParty::dispatch(const MessageBody& body) {
  if (const auto* m = std::get_if<PublicKeyMsg>(&body)) return on_public_key(*m);
  if (const auto* m = std::get_if<EncryptedGradients>(&body)) return on_gradients(*m);
  if (const auto* m = std::get_if<AggregateRequest>(&body)) return on_aggregate(*m);
  if (const auto* m = std::get_if<SplitDecision>(&body)) return on_split(*m);
  if (const auto* m = std::get_if<RoutingQuery>(&body)) return on_route(*m);
  if (std::holds_alternative<Done>(body)) return on_done();
  throw ProtocolError("passive party cannot handle '" + std::string(type_name(body)) + "'");
}

MessageBody PassiveParty::on_public_key(const PublicKeyMsg& m) {
  paillier::PublicKey pk(from_hex(m.n_hex));
  if (pk.key_bits() != m.bits) throw ProtocolError("public key bit length mismatch");
  pk_ = std::move(pk);
  FeatureCatalog catalog;
  catalog.party = party_id_;
  for (const auto& b : bins_) catalog.buckets.push_back(static_cast<int>(b.num_buckets()));
  return catalog;
}

MessageBody PassiveParty::on_gradients(const EncryptedGradients& m) {
  if (!pk_) throw ProtocolError("encrypted gradients before public key");
  const std::size_t per_instance = m.mode == GradientMode::kBatched ? 1 : 2;
  if (m.ciphertexts.size() != features_.num_rows() * per_instance) {
    throw ProtocolError("expected " + std::to_string(features_.num_rows() * per_instance) +
                        " ciphertexts, got " + std::to_string(m.ciphertexts.size()));
  }
  const auto start = Clock::now();
  mode_ = m.mode;
  gradients_.clear();
  gradients_.reserve(m.ciphertexts.size());
  for (const auto& hex : m.ciphertexts) gradients_.push_back(paillier::Ciphertext::from_hex(*pk_, hex));
  node_rows_.clear();
  costs_.time.transfer += seconds_since(start);
  return Ack{};
}

MessageBody PassiveParty::on_aggregate(const AggregateRequest& m) {
  if (gradients_.empty() && features_.num_rows() > 0) throw ProtocolError("aggregate request before gradients");
  if (m.instances.size() != features_.num_rows()) throw ProtocolError("instance bitmap has the wrong length");
  const std::vector<std::uint32_t> rows = m.instances.rows();
  const std::size_t per_instance = mode_ == GradientMode::kBatched ? 1 : 2;

  AggregatedHistograms out;
  out.node = m.node;
  for (int f : m.features) {
    if (f < 0 || static_cast<std::size_t>(f) >= bins_.size()) {
      throw ProtocolError("unknown feature id " + std::to_string(f));
    }
    const xgb::FeatureBins& fb = bins_[static_cast<std::size_t>(f)];
    const auto start = Clock::now();
    std::vector<std::uint64_t> counts(fb.num_buckets(), 0);
    std::vector<std::vector<paillier::Ciphertext>> sums(fb.num_buckets());
    for (std::uint32_t i : rows) {
      const std::uint32_t b = fb.bucket_of[i];
      auto& acc = sums[b];
      if (counts[b]++ == 0) {
        for (std::size_t k = 0; k < per_instance; ++k) acc.push_back(gradients_[i * per_instance + k]);
      } else {
        for (std::size_t k = 0; k < per_instance; ++k) {
          paillier::add_inplace(*pk_, acc[k], gradients_[i * per_instance + k]);
          ++costs_.homomorphic_adds;
        }
      }
    }
    costs_.time.aggregate += seconds_since(start);

    const auto ser_start = Clock::now();
    FeatureHistogram hist;
    hist.feature = f;
    for (std::size_t b = 0; b < fb.num_buckets(); ++b) {
      BucketAggregate bucket;
      bucket.count = counts[b];
      for (std::size_t k = 0; k < per_instance; ++k) {
        const paillier::Ciphertext ct = counts[b] == 0 ? paillier::zero_ciphertext(*pk_) : sums[b][k];
        bucket.ciphertexts.push_back(ct.to_hex(*pk_));
      }
      costs_.ciphertexts_sent += per_instance;
      costs_.ciphertext_bytes_sent += per_instance * pk_->ciphertext_bytes();
      hist.buckets.push_back(std::move(bucket));
    }
    costs_.time.transfer += seconds_since(ser_start);
    out.features.push_back(std::move(hist));
  }
  node_rows_[m.node] = rows;
  return out;
}

MessageBody PassiveParty::on_split(const SplitDecision& m) {
  auto it = node_rows_.find(m.node);
  if (it == node_rows_.end()) throw ProtocolError("split decision for unknown node " + std::to_string(m.node));
  if (m.feature < 0 || static_cast<std::size_t>(m.feature) >= bins_.size()) {
    throw ProtocolError("split decision names unknown feature");
  }
  const xgb::FeatureBins& fb = bins_[static_cast<std::size_t>(m.feature)];
  if (m.threshold_index < 0 || static_cast<std::size_t>(m.threshold_index) >= fb.thresholds.size()) {
    throw ProtocolError("split decision names unknown threshold");
  }
  const auto start = Clock::now();
  LookupEntry entry{lookup_.size(), m.feature, m.threshold_index,
                    fb.thresholds[static_cast<std::size_t>(m.threshold_index)]};
  lookup_.push_back(entry);
  PartitionResult out;
  out.node = m.node;
  out.lookup_id = entry.lookup_id;
  out.left = Bitmap(features_.num_rows());
  for (std::uint32_t i : it->second) {
    if (fb.bucket_of[i] <= static_cast<std::uint32_t>(m.threshold_index)) out.left.set(i);
  }
  node_rows_.erase(it);
  costs_.time.tree_build += seconds_since(start);
  return out;
}

MessageBody PassiveParty::on_route(const RoutingQuery& m) {
  if (m.lookup_id >= lookup_.size()) throw ProtocolError("stale lookup id " + std::to_string(m.lookup_id));
  const xgb::FeatureMatrix& view = inference_features_ ? *inference_features_ : features_;
  if (m.row >= view.num_rows()) throw ProtocolError("routing query row out of range");
  const LookupEntry& e = lookup_[m.lookup_id];
  ++costs_.routing_queries;
  return RoutingAnswer{view.columns[static_cast<std::size_t>(e.feature)][m.row] <= e.threshold};
}

MessageBody PassiveParty::on_done() {
  node_rows_.clear();
  gradients_.clear();
  // The Done reply itself is counted as sent.
  PartyCosts snapshot = costs_;
  ++snapshot.messages_sent;
  return Done{snapshot.to_json()};
}

std::string PassiveParty::lookup_table_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : lookup_) {
    entries.push_back({{"lookup_id", e.lookup_id},
                       {"feature", e.feature},
                       {"feature_name", features_.names.empty() ? std::string() : features_.names[static_cast<std::size_t>(e.feature)]},
                       {"threshold_index", e.threshold_index},
                       {"threshold", e.threshold}});
  }
  return nlohmann::json{{"party", party_id_}, {"lookup", std::move(entries)}}.dump(1);
}

void PassiveParty::load_lookup_table_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<LookupEntry> table;
    for (const auto& e : j.at("lookup")) {
      table.push_back({e.at("lookup_id").get<std::uint64_t>(), e.at("feature").get<int>(),
                       e.at("threshold_index").get<int>(), e.at("threshold").get<double>()});
      if (table.back().lookup_id != table.size() - 1) throw InvalidArgument("lookup ids must be dense");
    }
    lookup_ = std::move(table);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("lookup table json: ") + e.what());
  }
}

}  // namespace vfxgb::fed
