#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <set>

#include "vfxgb/data.h"
#include "vfxgb/error.h"
#include "vfxgb/federation/session.h"
#include "vfxgb/xgb_core.h"

using namespace vfxgb;
using namespace vfxgb::fed;
using json = nlohmann::json;

namespace {

struct Views {
  data::PartyView ap;
  data::PartyView pp;
};

Views synth_views(std::size_t n, std::size_t d_ap, std::size_t d_pp, std::uint64_t seed) {
  auto [ds, plan] = data::synth_credit(n, d_ap, d_pp, seed);
  auto [ap, pp] = data::vertical_split(ds, plan);
  return {std::move(ap), std::move(pp)};
}

// Integer gradients that still depend on the labels and the running scores.
xgb::GradientFn integer_gradients() {
  return [](std::span<const int> labels, std::span<const double> scores, int tree) {
    std::vector<xgb::GradientPair> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double target = labels[i] ? 2.0 : -2.0;
      out[i].g = std::clamp(std::round(scores[i] - target), -3.0, 3.0);
      out[i].h = 1.0 + static_cast<double>((tree + labels[i] + static_cast<int>(i)) % 3);
    }
    return out;
  };
}

// Resolution 1 with room for every sum at n <= 200: lossless for the grid above.
codec::BatchConfig lossless_codec() {
  codec::BatchConfig c;
  c.r = 16;
  c.pad = 2;
  c.shift = {-4.0, -4.0};
  c.alpha = 16.0;
  c.alpha_max = 65536.0;
  return c;
}

FederationConfig base_config(GradientMode mode, int trees = 2) {
  FederationConfig cfg;
  cfg.mode = mode;
  cfg.key_bits = 128;
  cfg.seed = 5;
  cfg.params.num_trees = trees;
  cfg.params.max_depth = 3;
  cfg.params.num_buckets = 8;
  return cfg;
}

struct Trace {
  std::vector<std::pair<Direction, std::string>> entries;
  void attach(FederatedSession& s) {
    s.set_trace([this](int, Direction d, const std::string& p) { entries.emplace_back(d, p); });
  }
  std::vector<json> outgoing() const {
    std::vector<json> out;
    for (const auto& [d, p] : entries)
      if (d == Direction::kOutgoing) out.push_back(json::parse(p));
    return out;
  }
  std::vector<json> incoming() const {
    std::vector<json> out;
    for (const auto& [d, p] : entries)
      if (d == Direction::kIncoming) out.push_back(json::parse(p));
    return out;
  }
  std::size_t count(const std::string& type, Direction dir) const {
    std::size_t c = 0;
    for (const auto& j : dir == Direction::kOutgoing ? outgoing() : incoming()) c += j["type"] == type;
    return c;
  }
};

void collect_non_integers(const json& j, std::vector<double>& out) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v != std::floor(v)) out.push_back(v);
  } else if (j.is_structured()) {
    for (const auto& x : j) collect_non_integers(x, out);
  }
}

std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

int joined_feature(const xgb::Split& s, std::size_t d_ap) {
  return s.party == 0 ? s.feature : static_cast<int>(d_ap) + s.feature;
}

void expect_same_trees(const xgb::BoostedModel& fed_model, const xgb::BoostedModel& central, std::size_t d_ap) {
  ASSERT_EQ(fed_model.trees.size(), central.trees.size());
  for (std::size_t t = 0; t < central.trees.size(); ++t) {
    const auto& a = fed_model.trees[t].nodes;
    const auto& b = central.trees[t].nodes;
    ASSERT_EQ(a.size(), b.size()) << "tree " << t;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ASSERT_EQ(a[k].is_leaf(), b[k].is_leaf()) << "tree " << t << " node " << k;
      EXPECT_EQ(a[k].left, b[k].left);
      EXPECT_EQ(a[k].right, b[k].right);
      if (a[k].is_leaf()) {
        EXPECT_NEAR(a[k].weight, b[k].weight, 1e-12);
      } else {
        EXPECT_EQ(joined_feature(*a[k].split, d_ap), b[k].split->feature);
        EXPECT_EQ(a[k].split->threshold_index, b[k].split->threshold_index);
      }
    }
  }
}

}  // namespace

TEST(Federation, PreparedCiphertextCounts) {
  const auto kp = paillier::keygen(128, 1);
  RandomSource rng(2);
  const std::vector<xgb::GradientPair> grads = {{-0.5, 0.25}, {0.3, 0.21}, {0.9, 0.09}};
  const codec::BatchConfig cfg;
  PartyCosts costs;
  const auto batched = prepare_gradients(grads, GradientMode::kBatched, cfg, kp.pk, rng, costs);
  EXPECT_EQ(batched.ciphertexts.size(), 3u);
  EXPECT_EQ(costs.encryptions, 3u);
  const auto per_value = prepare_gradients(grads, GradientMode::kPerValue, cfg, kp.pk, rng, costs);
  EXPECT_EQ(per_value.ciphertexts.size(), 6u);
  EXPECT_EQ(costs.encryptions, 9u);

  for (std::size_t i = 0; i < grads.size(); ++i) {
    const BigInt z = paillier::decrypt(kp.sk, paillier::Ciphertext::from_hex(kp.pk, batched.ciphertexts[i]));
    const auto d = codec::decode_sum(cfg, z, 1);
    EXPECT_LE(std::abs(d.values[0] - grads[i].g), cfg.resolution());
    EXPECT_LE(std::abs(d.values[1] - grads[i].h), cfg.resolution());
    for (int j = 0; j < 2; ++j) {
      const BigInt zj = paillier::decrypt(
          kp.sk, paillier::Ciphertext::from_hex(kp.pk, per_value.ciphertexts[2 * i + static_cast<std::size_t>(j)]));
      const double v = codec::decode_sum(cfg.single_slot(j), zj, 1).values[0];
      EXPECT_EQ(v, d.values[static_cast<std::size_t>(j)]);
    }
  }
}

class PassiveAggregation : public ::testing::TestWithParam<GradientMode> {};

TEST_P(PassiveAggregation, BucketSumsAndAddCounts) {
  const GradientMode mode = GetParam();
  const auto v = synth_views(120, 1, 3, 4);
  const int buckets = 6;
  PassiveParty pp(v.pp.features, buckets);
  const auto kp = paillier::keygen(128, 3);
  RandomSource rng(4);
  const codec::BatchConfig cfg;
  std::vector<xgb::GradientPair> grads(120);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    grads[i] = {std::sin(static_cast<double>(i)), 0.1 + 0.001 * static_cast<double>(i)};
  }
  PartyCosts ap_costs;
  std::uint64_t seq = 0;
  auto call = [&](MessageBody b) { return pp.handle(Message{seq++, std::nullopt, std::move(b)}).body; };
  ASSERT_TRUE(std::holds_alternative<FeatureCatalog>(call(PublicKeyMsg{to_hex(kp.pk.n()), 128})));
  ASSERT_TRUE(std::holds_alternative<Ack>(call(prepare_gradients(grads, mode, cfg, kp.pk, rng, ap_costs))));

  // every third row
  std::vector<std::uint32_t> rows;
  for (std::uint32_t i = 0; i < 120; i += 3) rows.push_back(i);
  const MessageBody reply = call(AggregateRequest{0, 0, Bitmap::from_rows(120, rows), {0, 1, 2}});
  ASSERT_TRUE(std::holds_alternative<AggregatedHistograms>(reply)) << std::get<ErrorReply>(reply).message;
  const auto& hist = std::get<AggregatedHistograms>(reply);

  std::uint64_t expected_adds = 0;
  PartyCosts decode_costs;
  for (int f = 0; f < 3; ++f) {
    const auto& bins = pp.bins()[static_cast<std::size_t>(f)];
    const auto plain = xgb::build_histogram(bins, grads, rows);
    const auto decoded = decode_histogram(hist.features[static_cast<std::size_t>(f)], mode, cfg, kp.sk,
                                          OverflowPolicy::kAbort, decode_costs);
    ASSERT_EQ(decoded.size(), plain.size());
    for (std::size_t b = 0; b < plain.size(); ++b) {
      EXPECT_EQ(decoded[b].count, plain[b].count);
      const double bound = codec::precision_bound(cfg, std::max<std::uint64_t>(plain[b].count, 1), 0.0);
      EXPECT_LE(std::abs(decoded[b].g - plain[b].g), bound);
      EXPECT_LE(std::abs(decoded[b].h - plain[b].h), bound);
      if (plain[b].count > 0) expected_adds += plain[b].count - 1;
    }
  }
  const std::uint64_t factor = mode == GradientMode::kBatched ? 1 : 2;
  EXPECT_EQ(pp.costs().homomorphic_adds, factor * expected_adds);
  EXPECT_EQ(pp.costs().encryptions, 0u);
}

TEST_P(PassiveAggregation, SingletonBucketIsThatInstance) {
  const GradientMode mode = GetParam();
  xgb::FeatureMatrix f;
  f.names = {"x"};
  f.columns = {{1, 2, 3, 4}};
  PassiveParty pp(f, 4);
  const auto kp = paillier::keygen(128, 8);
  RandomSource rng(1);
  const codec::BatchConfig cfg;
  const std::vector<xgb::GradientPair> grads = {{0.1, 0.2}, {-0.7, 0.15}, {0.4, 0.1}, {0.2, 0.2}};
  PartyCosts costs;
  const auto enc = prepare_gradients(grads, mode, cfg, kp.pk, rng, costs);
  std::uint64_t seq = 0;
  pp.handle(Message{seq++, std::nullopt, PublicKeyMsg{to_hex(kp.pk.n()), 128}});
  pp.handle(Message{seq++, std::nullopt, enc});
  const auto reply = pp.handle(Message{seq++, std::nullopt, AggregateRequest{0, 0, Bitmap::from_rows(4, {1}), {0}}});
  const auto& hist = std::get<AggregatedHistograms>(reply.body);
  const auto& bucket = hist.features[0].buckets[1];
  ASSERT_EQ(bucket.count, 1u);
  const std::size_t width = mode == GradientMode::kBatched ? 1 : 2;
  for (std::size_t j = 0; j < width; ++j) EXPECT_EQ(bucket.ciphertexts[j], enc.ciphertexts[width * 1 + j]);
  // empty buckets carry Enc(0) with unit randomness
  EXPECT_EQ(hist.features[0].buckets[0].count, 0u);
  EXPECT_EQ(hist.features[0].buckets[0].ciphertexts[0], paillier::zero_ciphertext(kp.pk).to_hex(kp.pk));
  const auto decoded = decode_histogram(hist.features[0], mode, cfg, kp.sk, OverflowPolicy::kAbort, costs);
  EXPECT_NEAR(decoded[1].g, -0.7, cfg.resolution());
  EXPECT_NEAR(decoded[1].h, 0.15, cfg.resolution());
  EXPECT_EQ(decoded[0].g, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Modes, PassiveAggregation,
                         ::testing::Values(GradientMode::kBatched, GradientMode::kPerValue),
                         [](const auto& info) { return std::string(info.param == GradientMode::kBatched ? "Batched" : "PerValue"); });

TEST(Federation, RemoteSplitGainMatchesHandValue) {
  const auto kp = paillier::keygen(128, 2);
  RandomSource rng(3);
  codec::BatchConfig cfg = lossless_codec();
  auto bucket = [&](double g, double h) {
    const double m[] = {g, h};
    BucketAggregate b;
    b.count = 1;
    b.ciphertexts = {paillier::encrypt(kp.pk, codec::encode(cfg, m).z, rng).to_hex(kp.pk)};
    return b;
  };
  AggregatedHistograms hist;
  hist.features.push_back(FeatureHistogram{0, {bucket(2, 3), bucket(-1, 2)}});
  PartyCosts costs;
  const auto c = evaluate_remote_splits(hist, GradientMode::kBatched, cfg, kp.sk, xgb::BucketStats{1, 5, 2}, 1.0, 0.0,
                                        OverflowPolicy::kAbort, costs);
  ASSERT_TRUE(c.valid());
  EXPECT_EQ(c.feature, 0);
  EXPECT_EQ(c.threshold_index, 0);
  EXPECT_NEAR(c.gain, 7.0 / 12.0, 1e-15);
  EXPECT_EQ(costs.decryptions, 2u);

  AggregatedHistograms single;
  single.features.push_back(FeatureHistogram{0, {bucket(1, 1)}});
  EXPECT_FALSE(evaluate_remote_splits(single, GradientMode::kBatched, cfg, kp.sk, xgb::BucketStats{1, 1, 1}, 1.0, 0.0,
                                      OverflowPolicy::kAbort, costs)
                   .valid());
}

TEST(Federation, PartitionFollowsBuckets) {
  xgb::FeatureMatrix f;
  f.names = {"x"};
  f.columns = {{5, 1, 4, 2, 3, 6, 8, 7}};
  PassiveParty pp(f, 4);
  const auto kp = paillier::keygen(128, 1);
  RandomSource rng(1);
  PartyCosts costs;
  std::uint64_t seq = 0;
  auto call = [&](MessageBody b) { return pp.handle(Message{seq++, std::nullopt, std::move(b)}).body; };
  call(PublicKeyMsg{to_hex(kp.pk.n()), 128});
  call(prepare_gradients(std::vector<xgb::GradientPair>(8, {0.1, 0.2}), GradientMode::kBatched, codec::BatchConfig{},
                         kp.pk, rng, costs));
  const auto& bins = pp.bins()[0];
  ASSERT_EQ(bins.thresholds, (std::vector<double>{2, 4, 6}));

  const std::vector<std::uint32_t> node = {0, 2, 4, 5, 6};
  call(AggregateRequest{0, 3, Bitmap::from_rows(8, node), {0}});
  const auto split = call(SplitDecision{3, 0, 1});
  ASSERT_TRUE(std::holds_alternative<PartitionResult>(split));
  const auto& part = std::get<PartitionResult>(split);
  EXPECT_EQ(part.lookup_id, 0u);
  EXPECT_EQ(part.left.rows(), (std::vector<std::uint32_t>{2, 4}));  // values 4, 3
  // oracle: rows of the node whose bucket is <= 1
  std::vector<std::uint32_t> expected;
  for (auto i : node)
    if (bins.bucket_of[i] <= 1) expected.push_back(i);
  EXPECT_EQ(part.left.rows(), expected);

  // threshold below every value in the node
  call(AggregateRequest{0, 4, Bitmap::from_rows(8, {5, 6, 7}), {0}});
  const auto low = std::get<PartitionResult>(call(SplitDecision{4, 0, 0}));
  EXPECT_EQ(low.left.count(), 0u);
  EXPECT_EQ(low.lookup_id, 1u);

  EXPECT_TRUE(std::get<RoutingAnswer>(call(RoutingQuery{0, 1})).left);   // value 1 <= 4
  EXPECT_FALSE(std::get<RoutingAnswer>(call(RoutingQuery{0, 6})).left);  // value 8
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(RoutingQuery{9, 0})));
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(SplitDecision{99, 0, 0})));
  EXPECT_EQ(pp.lookup_table().size(), 2u);
  EXPECT_EQ(pp.lookup_table()[0].threshold, 4.0);
}

TEST(Federation, PassiveRejectsProtocolViolations) {
  xgb::FeatureMatrix f;
  f.names = {"x"};
  f.columns = {{1, 2, 3}};
  PassiveParty pp(f, 4);
  const auto kp = paillier::keygen(128, 1);
  std::uint64_t seq = 0;
  auto call = [&](MessageBody b) { return pp.handle(Message{seq++, std::nullopt, std::move(b)}).body; };
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(AggregateRequest{0, 0, Bitmap(3), {0}})));
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(EncryptedGradients{0, GradientMode::kBatched, {"01"}})));
  call(PublicKeyMsg{to_hex(kp.pk.n()), 128});
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(EncryptedGradients{0, GradientMode::kBatched, {"01"}})));
  RandomSource rng(1);
  PartyCosts costs;
  call(prepare_gradients(std::vector<xgb::GradientPair>(3), GradientMode::kBatched, codec::BatchConfig{}, kp.pk, rng,
                         costs));
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(AggregateRequest{0, 0, Bitmap(4), {0}})));
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(AggregateRequest{0, 0, Bitmap(3), {7}})));
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(call(Ack{})));
  // raw garbage
  const Message reply = decode_payload(pp.handle_payload("{not json"));
  EXPECT_TRUE(std::holds_alternative<ErrorReply>(reply.body));
}

TEST(Federation, WireFormat) {
  Bitmap b(13);
  b.set(0);
  b.set(9);
  b.set(12);
  EXPECT_EQ(Bitmap::from_base64(b.to_base64(), 13), b);
  EXPECT_EQ(b.rows(), (std::vector<std::uint32_t>{0, 9, 12}));
  EXPECT_EQ(b.to_base64(), "ARI=");  // bytes 0x01 0x12, little-endian bit order
  EXPECT_THROW(Bitmap::from_base64("@@@@", 13), ProtocolError);

  const Message m{7, 3, AggregateRequest{1, 2, b, {0, 4}}};
  const std::string payload = encode_payload(m);
  const json j = json::parse(payload);
  EXPECT_EQ(j["v"], 1);
  EXPECT_EQ(j["seq"], 7);
  EXPECT_EQ(j["type"], "aggregate_request");
  EXPECT_EQ(j["body"]["reply_to"], 3);
  const Message back = decode_payload(payload);
  EXPECT_EQ(back.seq, 7u);
  EXPECT_EQ(*back.reply_to, 3u);
  EXPECT_EQ(std::get<AggregateRequest>(back.body).instances, b);

  EXPECT_THROW(decode_payload("{\"v\":2,\"seq\":0,\"type\":\"done\",\"body\":{}}"), ProtocolError);
  EXPECT_THROW(decode_payload("{\"v\":1,\"seq\":0,\"type\":\"nope\",\"body\":{}}"), ProtocolError);
  EXPECT_THROW(decode_payload("[]"), ProtocolError);

  const std::string f = frame("abc");
  ASSERT_EQ(f.size(), 7u);
  EXPECT_EQ(frame_length(reinterpret_cast<const unsigned char*>(f.data())), 3u);
  EXPECT_EQ(f.substr(4), "abc");
}

class EndToEnd : public ::testing::TestWithParam<std::string> {};

TEST_P(EndToEnd, MatchesCentralizedOracleUnderLosslessCodec) {
  const auto v = synth_views(160, 3, 3, 21);
  const data::Dataset joined = data::join_views(v.ap, v.pp);
  for (GradientMode mode : {GradientMode::kBatched, GradientMode::kPerValue}) {
    FederationConfig cfg = base_config(mode, 3);
    cfg.codec = lossless_codec();
    cfg.gradient_fn = integer_gradients();
    FederatedSession session(v.ap, {v.pp}, cfg, ChannelSpec::parse(GetParam()));
    const TrainingResult fed_result = session.train();
    const auto central = xgb::train_centralized(joined.features, joined.labels, cfg.params, integer_gradients());
    expect_same_trees(fed_result.model, central.model, 3);

    std::size_t pp_splits = 0;
    for (const auto& t : fed_result.model.trees)
      for (const auto& n : t.nodes) pp_splits += n.split && n.split->party == 1;
    EXPECT_GT(pp_splits, 0u) << "construction should exercise Passive Party splits";

    const auto fed_scores = session.predict(fed_result.model, v.ap.features, {v.pp.features});
    for (std::size_t i = 0; i < fed_scores.size(); ++i) {
      ASSERT_EQ(fed_scores[i], central.train_scores[i]);
      ASSERT_EQ(fed_result.train_scores[i], central.train_scores[i]);
    }
    EXPECT_EQ(fed_result.ledger.active.overflow_warnings, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(Channels, EndToEnd, ::testing::Values("inproc", "queue", "tcp"),
                         [](const auto& info) { return info.param; });

TEST(Federation, ModesBuildIdenticalTreesAndHalveTheLedger) {
  const auto v = synth_views(300, 3, 4, 2);
  FederatedSession b(v.ap, {v.pp}, base_config(GradientMode::kBatched, 2));
  FederatedSession p(v.ap, {v.pp}, base_config(GradientMode::kPerValue, 2));
  const auto rb = b.train();
  const auto rp = p.train();
  EXPECT_EQ(xgb::model_to_json(rb.model), xgb::model_to_json(rp.model));
  EXPECT_EQ(rb.ledger.encryptions() * 2, rp.ledger.encryptions());
  EXPECT_EQ(rb.ledger.encryptions(), 300u * 2);
  EXPECT_EQ(rb.ledger.gradient_ciphertext_bytes() * 2, rp.ledger.gradient_ciphertext_bytes());
  EXPECT_EQ(rb.ledger.homomorphic_adds() * 2, rp.ledger.homomorphic_adds());
  EXPECT_EQ(rb.ledger.ciphertext_bytes() * 2, rp.ledger.ciphertext_bytes());
  EXPECT_EQ(rb.ledger.decryptions() * 2, rp.ledger.decryptions());
  EXPECT_GT(rb.ledger.passive.homomorphic_adds, 0u);
  EXPECT_EQ(rb.ledger.passive.encryptions, 0u);
  EXPECT_EQ(rb.ledger.per_tree_seconds.size(), 2u);
}

TEST(Federation, NoisePassivePartyNeverWinsButStillAggregates) {
  auto v = synth_views(200, 3, 2, 8);
  for (auto& col : v.pp.features.columns) std::fill(col.begin(), col.end(), 1.5);
  FederatedSession s(v.ap, {v.pp}, base_config(GradientMode::kBatched, 2));
  Trace trace;
  trace.attach(s);
  const auto r = s.train();
  const auto central = xgb::train_centralized(v.ap.features, v.ap.labels, base_config(GradientMode::kBatched, 2).params);
  EXPECT_EQ(xgb::model_to_json(r.model), xgb::model_to_json(central.model));
  std::size_t internal = 0;
  for (const auto& t : r.model.trees) internal += t.nodes.size() - t.num_leaves();
  EXPECT_GT(internal, 0u);
  std::size_t nodes_within_depth = 0;
  for (const auto& t : r.model.trees)
    for (const auto& n : t.nodes) nodes_within_depth += n.depth < 3;
  EXPECT_EQ(trace.count("aggregate_request", Direction::kOutgoing), nodes_within_depth);
  EXPECT_EQ(trace.count("split_decision", Direction::kOutgoing), 0u);
}

TEST(Federation, TraceRevealsNoPlaintexts) {
  const auto v = synth_views(150, 3, 3, 6);
  for (GradientMode mode : {GradientMode::kBatched, GradientMode::kPerValue}) {
    FederatedSession s(v.ap, {v.pp}, base_config(mode, 2));
    Trace trace;
    trace.attach(s);
    const auto r = s.train();
    s.predict(r.model, v.ap.features, {v.pp.features});

    std::set<std::string> ap_values, pp_values;
    for (const auto& col : v.ap.features.columns)
      for (double x : col) ap_values.insert(shortest(x));
    for (const auto& col : v.pp.features.columns)
      for (double x : col) pp_values.insert(shortest(x));

    const std::set<std::string> to_pp = {"public_key", "encrypted_gradients", "aggregate_request",
                                         "split_decision", "routing_query", "done"};
    for (const json& j : trace.outgoing()) {
      ASSERT_TRUE(to_pp.count(j["type"].get<std::string>())) << j["type"];
      std::vector<double> fractional;
      collect_non_integers(j, fractional);
      EXPECT_TRUE(fractional.empty()) << j["type"] << " carries a real value";
      const std::string text = j.dump();
      for (const auto& s : ap_values)
        if (s.find('.') != std::string::npos) ASSERT_EQ(text.find(s), std::string::npos) << s;
      EXPECT_FALSE(j["body"].contains("labels"));
    }
    for (const json& j : trace.incoming()) {
      if (j["type"] == "done") continue;  // carries the Passive Party's own cost report
      std::vector<double> fractional;
      collect_non_integers(j, fractional);
      EXPECT_TRUE(fractional.empty()) << j["type"] << " carries a real value";
      const std::string text = j.dump();
      for (const auto& s : pp_values)
        if (s.find('.') != std::string::npos) ASSERT_EQ(text.find(s), std::string::npos) << s;
      EXPECT_FALSE(j["body"].contains("threshold"));
    }
    // the model held by the Active Party only knows lookup ids for remote splits
    for (const auto& t : r.model.trees)
      for (const auto& n : t.nodes)
        if (n.split && n.split->party == 1) {
          EXPECT_TRUE(n.split->lookup_id.has_value());
          EXPECT_EQ(n.split->threshold, 0.0);
        }
  }
}

TEST(Federation, SameSeedGivesSameModelAndTrace) {
  const auto v = synth_views(150, 2, 3, 3);
  for (GradientMode mode : {GradientMode::kBatched, GradientMode::kPerValue}) {
    std::vector<std::string> traces[2];
    std::string models[2];
    for (int run = 0; run < 2; ++run) {
      FederatedSession s(v.ap, {v.pp}, base_config(mode, 2));
      s.set_trace([&](int, Direction, const std::string& p) {
        json j = json::parse(p);
        if (j["type"] == "done") j["body"].erase("costs");
        traces[run].push_back(j.dump());
      });
      models[run] = xgb::model_to_json(s.train().model);
    }
    EXPECT_EQ(models[0], models[1]);
    EXPECT_EQ(traces[0], traces[1]);
  }
}

TEST(Federation, TrainingEndsWithOneDoneExchange) {
  const auto v = synth_views(100, 2, 2, 3);
  FederatedSession s(v.ap, {v.pp}, base_config(GradientMode::kBatched, 3), ChannelSpec::parse("queue"));
  Trace trace;
  trace.attach(s);
  s.train();
  EXPECT_EQ(trace.count("done", Direction::kOutgoing), 1u);
  EXPECT_EQ(trace.count("done", Direction::kIncoming), 1u);
  EXPECT_EQ(trace.count("encrypted_gradients", Direction::kOutgoing), 3u);
  // sequence numbers increase per sender, replies reference their request
  std::uint64_t expect_seq = 0;
  std::vector<std::uint64_t> sent;
  for (const auto& j : trace.outgoing()) {
    EXPECT_EQ(j["seq"].get<std::uint64_t>(), expect_seq++);
    sent.push_back(j["seq"]);
  }
  const auto in = trace.incoming();
  ASSERT_EQ(in.size(), sent.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(in[i]["body"]["reply_to"].get<std::uint64_t>(), sent[i]);
}

TEST(Federation, RoutingQueriesOnlyForRemoteSplits) {
  // Active Party features are constant, so every split belongs to the Passive Party.
  auto v = synth_views(120, 1, 2, 9);
  std::fill(v.ap.features.columns[0].begin(), v.ap.features.columns[0].end(), 0.0);
  FederationConfig cfg = base_config(GradientMode::kBatched, 1);
  cfg.params.max_depth = 1;
  FederatedSession s(v.ap, {v.pp}, cfg);
  const auto r = s.train();
  ASSERT_EQ(r.model.trees[0].num_splits(), 1u);
  Trace trace;
  trace.attach(s);
  PartyCosts costs;
  s.predict(r.model, v.ap.features, {v.pp.features}, &costs);
  EXPECT_EQ(trace.count("routing_query", Direction::kOutgoing), 120u);
  EXPECT_EQ(costs.routing_queries, 120u);

  // a model without remote splits sends nothing
  auto w = synth_views(120, 3, 2, 9);
  for (auto& col : w.pp.features.columns) std::fill(col.begin(), col.end(), 0.0);
  FederatedSession local(w.ap, {w.pp}, base_config(GradientMode::kBatched, 2));
  const auto rl = local.train();
  Trace quiet;
  quiet.attach(local);
  local.predict(rl.model, w.ap.features, {w.pp.features});
  EXPECT_TRUE(quiet.entries.empty());
}

TEST(Federation, OverflowAbortsOrWarns) {
  const auto v = synth_views(200, 2, 2, 3);
  FederationConfig cfg = base_config(GradientMode::kBatched, 1);
  cfg.codec.r = 4;
  cfg.codec.alpha = 20;
  cfg.codec.alpha_max = 20;
  cfg.params.num_buckets = 2;
  {
    FederatedSession s(v.ap, {v.pp}, cfg);
    try {
      s.train();
      FAIL() << "expected overflow";
    } catch (const OverflowError& e) {
      const std::string msg = e.what();
      EXPECT_NE(msg.find("node 0"), std::string::npos) << msg;
      EXPECT_NE(msg.find("bucket"), std::string::npos) << msg;
    }
  }
  cfg.overflow = OverflowPolicy::kWarn;
  FederatedSession s(v.ap, {v.pp}, cfg, ChannelSpec::parse("queue"));
  const auto r = s.train();
  EXPECT_GT(r.ledger.active.overflow_warnings, 0u);
}

TEST(Federation, EmptyPassiveViewReducesToLocalTraining) {
  const auto v = synth_views(150, 3, 1, 4);
  data::PartyView empty_pp;
  empty_pp.ids = v.pp.ids;
  FederatedSession s(v.ap, {empty_pp}, base_config(GradientMode::kBatched, 2));
  Trace trace;
  trace.attach(s);
  const auto r = s.train();
  const auto central = xgb::train_centralized(v.ap.features, v.ap.labels, base_config(GradientMode::kBatched, 2).params);
  EXPECT_EQ(xgb::model_to_json(r.model), xgb::model_to_json(central.model));
  EXPECT_EQ(trace.count("aggregate_request", Direction::kOutgoing), 0u);
}

TEST(Federation, ConfigValidation) {
  FederationConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.key_bits = 100;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FederationConfig{};
  cfg.key_bits = 128;
  cfg.codec.r = 62;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FederationConfig{};
  cfg.codec.d = 3;
  cfg.codec.shift = {-1, -1, -1};
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(ChannelSpec::parse("pigeon"), ConfigError);
  EXPECT_THROW(ChannelSpec::parse("tcp:localhost"), ConfigError);
  const auto spec = ChannelSpec::parse("tcp:127.0.0.1:0");
  EXPECT_EQ(spec.kind, ChannelSpec::Kind::kTcp);
  EXPECT_EQ(ChannelSpec::parse("inproc").to_string(), "inproc");
}
