#include "vfxgb/federation/active_party.h"

#include <algorithm>
#include <chrono>
#include <deque>
#include <json.hpp>

#include "vfxgb/error.h"

namespace vfxgb::fed {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T>
T expect(Channel& channel, std::uint64_t request_seq) {
  Message reply = channel.receive();
  if (const auto* err = std::get_if<ErrorReply>(&reply.body)) {
    throw ProtocolError("passive party reported: " + err->message);
  }
  if (!reply.reply_to || *reply.reply_to != request_seq) {
    throw ProtocolError("reply does not reference request " + std::to_string(request_seq));
  }
  T* body = std::get_if<T>(&reply.body);
  if (!body) throw ProtocolError("unexpected reply type '" + std::string(type_name(reply.body)) + "'");
  return std::move(*body);
}

xgb::BucketStats decode_bucket(const BucketAggregate& bucket, GradientMode mode, const codec::BatchConfig& cfg,
                               const paillier::PrivateKey& sk, OverflowPolicy policy, PartyCosts& costs,
                               const std::string& where) {
  xgb::BucketStats out;
  out.count = bucket.count;
  if (bucket.count == 0) return out;
  const paillier::PublicKey& pk = sk.public_key();
  auto check = [&](const codec::DecodedSum& d) {
    if (!d.any_overflow()) return;
    if (policy == OverflowPolicy::kAbort) {
      throw OverflowError("codec overflow at " + where + " (" + std::to_string(bucket.count) +
                          " terms); protection bits reached '11'");
    }
    ++costs.overflow_warnings;
  };
  if (mode == GradientMode::kBatched) {
    if (bucket.ciphertexts.size() != 1) throw ProtocolError("batched bucket must carry one ciphertext");
    const BigInt z = paillier::decrypt(sk, paillier::Ciphertext::from_hex(pk, bucket.ciphertexts[0]));
    ++costs.decryptions;
    const codec::DecodedSum d = codec::decode_sum(cfg, z, bucket.count);
    check(d);
    out.g = d.values[0];
    out.h = d.values[1];
  } else {
    if (bucket.ciphertexts.size() != 2) throw ProtocolError("per-value bucket must carry two ciphertexts");
    for (int j = 0; j < 2; ++j) {
      const BigInt z = paillier::decrypt(sk, paillier::Ciphertext::from_hex(pk, bucket.ciphertexts[static_cast<std::size_t>(j)]));
      ++costs.decryptions;
      const codec::DecodedSum d = codec::decode_sum(cfg.single_slot(j), z, bucket.count);
      check(d);
      (j == 0 ? out.g : out.h) = d.values[0];
    }
  }
  return out;
}

}  // namespace

void FederationConfig::validate() const {
  params.validate();
  if (!paillier::is_supported_key_bits(key_bits)) {
    throw ConfigError("unsupported key_bits " + std::to_string(key_bits));
  }
  if (codec.d != 2) throw ConfigError("codec: gradient batching packs (g, h), so d must be 2");
  codec.validate_for_key(key_bits);
}

EncryptedGradients prepare_gradients(std::span<const xgb::GradientPair> gradients, GradientMode mode,
                                     const codec::BatchConfig& cfg, const paillier::PublicKey& pk,
                                     RandomSource& rng, PartyCosts& costs, int tree_index) {
  EncryptedGradients out;
  out.tree = tree_index;
  out.mode = mode;
  codec::EncodeStats stats;
  const auto start = Clock::now();
  if (mode == GradientMode::kBatched) {
    out.ciphertexts.reserve(gradients.size());
    for (const auto& gh : gradients) {
      const double pair[2] = {gh.g, gh.h};
      const codec::BatchedPlaintext z = codec::encode(cfg, pair, &stats);
      out.ciphertexts.push_back(paillier::encrypt(pk, z.z, rng).to_hex(pk));
      ++costs.encryptions;
    }
  } else {
    const codec::BatchConfig g_cfg = cfg.single_slot(0);
    const codec::BatchConfig h_cfg = cfg.single_slot(1);
    out.ciphertexts.reserve(2 * gradients.size());
    for (const auto& gh : gradients) {
      const codec::BatchedPlaintext zg = codec::encode(g_cfg, std::span<const double>(&gh.g, 1), &stats);
      const codec::BatchedPlaintext zh = codec::encode(h_cfg, std::span<const double>(&gh.h, 1), &stats);
      out.ciphertexts.push_back(paillier::encrypt(pk, zg.z, rng).to_hex(pk));
      out.ciphertexts.push_back(paillier::encrypt(pk, zh.z, rng).to_hex(pk));
      costs.encryptions += 2;
    }
  }
  costs.time.encrypt += seconds_since(start);
  costs.encode_below_shift += stats.below_shift;
  costs.encode_truncated += stats.truncated;
  return out;
}

std::vector<xgb::BucketStats> decode_histogram(const FeatureHistogram& hist, GradientMode mode,
                                               const codec::BatchConfig& cfg, const paillier::PrivateKey& sk,
                                               OverflowPolicy policy, PartyCosts& costs, const std::string& where) {
  const auto start = Clock::now();
  std::vector<xgb::BucketStats> out;
  out.reserve(hist.buckets.size());
  for (std::size_t b = 0; b < hist.buckets.size(); ++b) {
    out.push_back(decode_bucket(hist.buckets[b], mode, cfg, sk, policy, costs,
                                where + "feature " + std::to_string(hist.feature) + " bucket " + std::to_string(b)));
  }
  costs.time.decrypt += seconds_since(start);
  return out;
}

RemoteSplitCandidate evaluate_remote_splits(const AggregatedHistograms& histograms, GradientMode mode,
                                            const codec::BatchConfig& cfg, const paillier::PrivateKey& sk,
                                            const xgb::BucketStats& node_totals, double lambda, double gamma,
                                            OverflowPolicy policy, PartyCosts& costs, const std::string& where) {
  RemoteSplitCandidate best;
  for (const auto& hist : histograms.features) {
    const auto stats = decode_histogram(hist, mode, cfg, sk, policy, costs, where);
    const auto start = Clock::now();
    const xgb::SplitCandidate c = xgb::best_split_from_histogram(stats, node_totals, lambda, gamma);
    costs.time.tree_build += seconds_since(start);
    if (c.valid() && c.gain > best.gain) {
      best.gain = c.gain;
      best.feature = hist.feature;
      best.threshold_index = c.threshold_index;
    }
  }
  return best;
}

ActiveParty::ActiveParty(data::PartyView view, FederationConfig config)
    : view_(std::move(view)), config_(std::move(config)) {
  config_.validate();
  if (view_.labels.size() != view_.num_rows()) throw InvalidArgument("active view needs one label per row");
  if (!config_.gradient_fn) config_.gradient_fn = xgb::logistic_gradients();
}

TrainingResult ActiveParty::train(std::span<Channel* const> passive) {
  const auto total_start = Clock::now();
  costs_ = PartyCosts{};
  std::vector<std::uint64_t> sent_before;
  std::vector<std::uint64_t> bytes_before;
  std::vector<double> transfer_before;
  for (Channel* ch : passive) {
    sent_before.push_back(ch->messages_sent());
    bytes_before.push_back(ch->frame_bytes_sent());
    transfer_before.push_back(ch->transfer_seconds());
  }

  keys_ = paillier::keygen(config_.key_bits, config_.seed);
  RandomSource nonce_rng(config_.seed ^ 0x9e3779b97f4a7c15ULL);

  passive_buckets_.clear();
  for (std::size_t p = 0; p < passive.size(); ++p) {
    const std::uint64_t seq = passive[p]->send(PublicKeyMsg{to_hex(keys_->pk.n()), keys_->pk.key_bits()});
    FeatureCatalog cat = expect<FeatureCatalog>(*passive[p], seq);
    if (cat.party != static_cast<int>(p) + 1) throw ProtocolError("passive party id mismatch");
    passive_buckets_.push_back(std::move(cat.buckets));
  }
  bins_ = xgb::bin_all(view_.features, config_.params.num_buckets);

  TrainingResult result;
  result.model.params = config_.params;
  const std::size_t n = view_.num_rows();
  result.train_scores.assign(n, config_.params.base_score);

  for (int t = 0; t < config_.params.num_trees; ++t) {
    const auto tree_start = Clock::now();
    const auto grads = config_.gradient_fn(view_.labels, result.train_scores, t);
    if (grads.size() != n) throw InvalidArgument("gradient source returned the wrong number of pairs");
    // parties without features never aggregate, so they get no gradients
    const bool any_remote = std::any_of(passive_buckets_.begin(), passive_buckets_.end(),
                                        [](const auto& b) { return !b.empty(); });
    const EncryptedGradients enc =
        any_remote ? prepare_gradients(grads, config_.mode, config_.codec, keys_->pk, nonce_rng, costs_, t)
                   : EncryptedGradients{};
    for (std::size_t p = 0; p < passive.size(); ++p) {
      if (passive_buckets_[p].empty()) continue;
      Channel* ch = passive[p];
      const std::uint64_t seq = ch->send(enc);
      const std::uint64_t bytes = enc.ciphertexts.size() * keys_->pk.ciphertext_bytes();
      costs_.ciphertexts_sent += enc.ciphertexts.size();
      costs_.ciphertext_bytes_sent += bytes;
      costs_.gradient_ciphertext_bytes += bytes;
      expect<Ack>(*ch, seq);
    }
    std::vector<int> leaf_of(n, 0);
    xgb::Tree tree = build_tree(t, grads, passive, leaf_of);
    for (std::size_t i = 0; i < n; ++i) {
      result.train_scores[i] += config_.params.eta * tree.nodes[static_cast<std::size_t>(leaf_of[i])].weight;
    }
    result.model.trees.push_back(std::move(tree));
    result.ledger.per_tree_seconds.push_back(seconds_since(tree_start));
  }

  for (Channel* ch : passive) {
    const std::uint64_t seq = ch->send(Done{});
    const Done done = expect<Done>(*ch, seq);
    if (!done.costs_json.empty()) result.ledger.passive += PartyCosts::from_json(done.costs_json);
  }

  for (std::size_t p = 0; p < passive.size(); ++p) {
    costs_.messages_sent += passive[p]->messages_sent() - sent_before[p];
    costs_.frame_bytes_sent += passive[p]->frame_bytes_sent() - bytes_before[p];
    costs_.time.transfer += passive[p]->transfer_seconds() - transfer_before[p];
  }
  result.ledger.active = costs_;
  result.ledger.total_seconds = seconds_since(total_start);
  return result;
}

xgb::Tree ActiveParty::build_tree(int tree_index, std::span<const xgb::GradientPair> gradients,
                                  std::span<Channel* const> passive, std::vector<int>& leaf_of) {
  struct Pending {
    int node;
    std::vector<std::uint32_t> rows;
  };
  const xgb::TreeParams& params = config_.params;
  const std::size_t n = gradients.size();
  xgb::Tree tree;
  tree.nodes.push_back(xgb::TreeNode{});
  std::deque<Pending> queue;
  {
    Pending root{0, std::vector<std::uint32_t>(n)};
    for (std::size_t i = 0; i < n; ++i) root.rows[i] = static_cast<std::uint32_t>(i);
    queue.push_back(std::move(root));
  }

  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();
    const int depth = tree.nodes[static_cast<std::size_t>(cur.node)].depth;

    auto start = Clock::now();
    const xgb::BucketStats totals = xgb::node_totals(gradients, cur.rows);
    double best_gain = xgb::kNoSplit;
    int best_party = -1;
    int best_feature = -1;
    int best_threshold = -1;
    if (depth < params.max_depth) {
      for (std::size_t k = 0; k < bins_.size(); ++k) {
        const auto hist = xgb::build_histogram(bins_[k], gradients, cur.rows);
        const xgb::SplitCandidate c = xgb::best_split_from_histogram(hist, totals, params.lambda, params.gamma);
        if (c.valid() && c.gain > best_gain) {
          best_gain = c.gain;
          best_party = 0;
          best_feature = static_cast<int>(k);
          best_threshold = c.threshold_index;
        }
      }
    }
    costs_.time.tree_build += seconds_since(start);

    if (depth < params.max_depth) {
      for (std::size_t p = 0; p < passive.size(); ++p) {
        if (passive_buckets_[p].empty()) continue;
        AggregateRequest req;
        req.tree = tree_index;
        req.node = cur.node;
        req.instances = Bitmap::from_rows(n, cur.rows);
        for (std::size_t k = 0; k < passive_buckets_[p].size(); ++k) req.features.push_back(static_cast<int>(k));
        const std::uint64_t seq = passive[p]->send(std::move(req));
        const AggregatedHistograms hist = expect<AggregatedHistograms>(*passive[p], seq);
        if (hist.node != cur.node) throw ProtocolError("histograms for the wrong node");
        const std::string where = "tree " + std::to_string(tree_index) + " node " + std::to_string(cur.node) +
                                  " party " + std::to_string(p + 1) + " ";
        const RemoteSplitCandidate c =
            evaluate_remote_splits(hist, config_.mode, config_.codec, keys_->sk, totals, params.lambda,
                                   params.gamma, config_.overflow, costs_, where);
        if (c.valid() && c.gain > best_gain) {
          best_gain = c.gain;
          best_party = static_cast<int>(p) + 1;
          best_feature = c.feature;
          best_threshold = c.threshold_index;
        }
      }
    }

    if (best_party >= 0 && best_gain > 0.0) {
      start = Clock::now();
      xgb::Split split;
      split.party = best_party;
      split.feature = best_feature;
      split.threshold_index = best_threshold;
      Pending left{static_cast<int>(tree.nodes.size()), {}};
      Pending right{left.node + 1, {}};
      if (best_party == 0) {
        const xgb::FeatureBins& fb = bins_[static_cast<std::size_t>(best_feature)];
        split.threshold = fb.thresholds[static_cast<std::size_t>(best_threshold)];
        for (std::uint32_t i : cur.rows) {
          (fb.bucket_of[i] <= static_cast<std::uint32_t>(best_threshold) ? left.rows : right.rows).push_back(i);
        }
      } else {
        Channel& ch = *passive[static_cast<std::size_t>(best_party - 1)];
        costs_.time.tree_build += seconds_since(start);
        const std::uint64_t seq = ch.send(SplitDecision{cur.node, best_feature, best_threshold});
        const PartitionResult part = expect<PartitionResult>(ch, seq);
        start = Clock::now();
        if (part.node != cur.node || part.left.size() != n) throw ProtocolError("partition result does not match node");
        split.lookup_id = part.lookup_id;
        std::size_t left_seen = 0;
        for (std::uint32_t i : cur.rows) {
          if (part.left.test(i)) {
            left.rows.push_back(i);
          } else {
            right.rows.push_back(i);
          }
        }
        left_seen = left.rows.size();
        if (part.left.count() != left_seen) throw ProtocolError("partition includes rows outside the node");
      }
      xgb::TreeNode& node = tree.nodes[static_cast<std::size_t>(cur.node)];
      node.split = split;
      node.left = left.node;
      node.right = right.node;
      xgb::TreeNode child;
      child.depth = depth + 1;
      tree.nodes.push_back(child);
      tree.nodes.push_back(child);
      queue.push_back(std::move(left));
      queue.push_back(std::move(right));
      costs_.time.tree_build += seconds_since(start);
    } else {
      tree.nodes[static_cast<std::size_t>(cur.node)].weight = xgb::leaf_weight(totals.g, totals.h, params.lambda);
      for (std::uint32_t i : cur.rows) leaf_of[i] = cur.node;
    }
  }
  return tree;
}

std::vector<double> ActiveParty::predict(const xgb::BoostedModel& model, const xgb::FeatureMatrix& features,
                                         std::span<Channel* const> passive, PartyCosts* costs) {
  std::vector<bool> queried(passive.size(), false);
  std::uint64_t queries = 0;
  xgb::RemoteRouter router = [&](const xgb::Split& split, std::size_t row) {
    if (split.party < 1 || static_cast<std::size_t>(split.party) > passive.size()) {
      throw ProtocolError("split owned by unknown party " + std::to_string(split.party));
    }
    const std::size_t p = static_cast<std::size_t>(split.party - 1);
    queried[p] = true;
    ++queries;
    const std::uint64_t seq = passive[p]->send(RoutingQuery{*split.lookup_id, row});
    return expect<RoutingAnswer>(*passive[p], seq).left;
  };
  std::vector<double> scores = xgb::predict_all(model, features, router);
  for (std::size_t p = 0; p < passive.size(); ++p) {
    if (!queried[p]) continue;
    const std::uint64_t seq = passive[p]->send(Done{});
    expect<Done>(*passive[p], seq);
  }
  if (costs) costs->routing_queries += queries;
  return scores;
}

}  // namespace vfxgb::fed
