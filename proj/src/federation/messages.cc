#include "vfxgb/federation/messages.h"

#include <array>
#include <json.hpp>

#include "vfxgb/error.h"

namespace vfxgb::fed {
namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = in.size() - i;
  if (rest == 1) {
    const std::uint32_t v = in[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view in) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = i;
  if (in.size() % 4 != 0) throw ProtocolError("base64 length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = in[i + k];
      if (c == '=' && i + 4 == in.size() && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = lookup[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw ProtocolError("invalid base64 input");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

json bitmap_json(const Bitmap& b) { return {{"n", b.size()}, {"bits", b.to_base64()}}; }

Bitmap bitmap_from(const json& j) {
  return Bitmap::from_base64(j.at("bits").get<std::string>(), j.at("n").get<std::size_t>());
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json body_to_json(const MessageBody& body) {
  return std::visit(
      Overloaded{
          [](const PublicKeyMsg& m) -> json { return {{"n", m.n_hex}, {"bits", m.bits}}; },
          [](const FeatureCatalog& m) -> json { return {{"party", m.party}, {"buckets", m.buckets}}; },
          [](const EncryptedGradients& m) -> json {
            return {{"tree", m.tree}, {"mode", to_string(m.mode)}, {"ciphertexts", m.ciphertexts}};
          },
          [](const Ack&) -> json { return json::object(); },
          [](const AggregateRequest& m) -> json {
            return {{"tree", m.tree},
                    {"node", m.node},
                    {"instances", bitmap_json(m.instances)},
                    {"features", m.features}};
          },
          [](const AggregatedHistograms& m) -> json {
            json features = json::array();
            for (const auto& f : m.features) {
              json buckets = json::array();
              for (const auto& b : f.buckets) buckets.push_back({{"count", b.count}, {"ct", b.ciphertexts}});
              features.push_back({{"feature", f.feature}, {"buckets", std::move(buckets)}});
            }
            return {{"node", m.node}, {"features", std::move(features)}};
          },
          [](const SplitDecision& m) -> json {
            return {{"node", m.node}, {"feature", m.feature}, {"threshold_index", m.threshold_index}};
          },
          [](const PartitionResult& m) -> json {
            return {{"node", m.node}, {"lookup_id", m.lookup_id}, {"left", bitmap_json(m.left)}};
          },
          [](const RoutingQuery& m) -> json { return {{"lookup_id", m.lookup_id}, {"row", m.row}}; },
          [](const RoutingAnswer& m) -> json { return {{"left", m.left}}; },
          [](const Done& m) -> json {
            json j = json::object();
            if (!m.costs_json.empty()) j["costs"] = json::parse(m.costs_json);
            return j;
          },
          [](const ErrorReply& m) -> json { return {{"message", m.message}}; },
      },
      body);
}

MessageBody body_from_json(std::string_view type, const json& b) {
  if (type == "public_key") return PublicKeyMsg{b.at("n").get<std::string>(), b.at("bits").get<int>()};
  if (type == "feature_catalog") {
    return FeatureCatalog{b.at("party").get<int>(), b.at("buckets").get<std::vector<int>>()};
  }
  if (type == "encrypted_gradients") {
    return EncryptedGradients{b.at("tree").get<int>(), parse_gradient_mode(b.at("mode").get<std::string>()),
                              b.at("ciphertexts").get<std::vector<std::string>>()};
  }
  if (type == "ack") return Ack{};
  if (type == "aggregate_request") {
    return AggregateRequest{b.at("tree").get<int>(), b.at("node").get<int>(), bitmap_from(b.at("instances")),
                            b.at("features").get<std::vector<int>>()};
  }
  if (type == "aggregated_histograms") {
    AggregatedHistograms m;
    m.node = b.at("node").get<int>();
    for (const auto& jf : b.at("features")) {
      FeatureHistogram f;
      f.feature = jf.at("feature").get<int>();
      for (const auto& jb : jf.at("buckets")) {
        f.buckets.push_back({jb.at("count").get<std::uint64_t>(), jb.at("ct").get<std::vector<std::string>>()});
      }
      m.features.push_back(std::move(f));
    }
    return m;
  }
  if (type == "split_decision") {
    return SplitDecision{b.at("node").get<int>(), b.at("feature").get<int>(), b.at("threshold_index").get<int>()};
  }
  if (type == "partition_result") {
    return PartitionResult{b.at("node").get<int>(), b.at("lookup_id").get<std::uint64_t>(), bitmap_from(b.at("left"))};
  }
  if (type == "routing_query") return RoutingQuery{b.at("lookup_id").get<std::uint64_t>(), b.at("row").get<std::uint64_t>()};
  if (type == "routing_answer") return RoutingAnswer{b.at("left").get<bool>()};
  if (type == "done") return Done{b.contains("costs") ? b["costs"].dump() : std::string()};
  if (type == "error") return ErrorReply{b.at("message").get<std::string>()};
  throw ProtocolError("unknown message type '" + std::string(type) + "'");
}

}  // namespace

std::string_view to_string(GradientMode mode) {
  return mode == GradientMode::kBatched ? "batched" : "per_value";
}

GradientMode parse_gradient_mode(std::string_view s) {
  if (s == "batched") return GradientMode::kBatched;
  if (s == "per_value" || s == "per-value") return GradientMode::kPerValue;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected batched or per_value)");
}

Bitmap Bitmap::from_rows(std::size_t size, const std::vector<std::uint32_t>& rows) {
  Bitmap b(size);
  for (std::uint32_t r : rows) {
    if (r >= size) throw InvalidArgument("bitmap row out of range");
    b.set(r);
  }
  return b;
}

std::size_t Bitmap::count() const {
  std::size_t c = 0;
  for (std::uint8_t byte : bytes_) c += static_cast<std::size_t>(__builtin_popcount(byte));
  return c;
}

std::vector<std::uint32_t> Bitmap::rows() const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < size_; ++i) {
    if (test(i)) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::string Bitmap::to_base64() const { return base64_encode(bytes_); }

Bitmap Bitmap::from_base64(std::string_view text, std::size_t size) {
  Bitmap b;
  b.size_ = size;
  b.bytes_ = base64_decode(text);
  if (b.bytes_.size() != (size + 7) / 8) throw ProtocolError("bitmap byte length does not match bit count");
  if (size % 8 != 0 && !b.bytes_.empty() && (b.bytes_.back() >> (size % 8)) != 0) {
    throw ProtocolError("bitmap has bits set beyond its size");
  }
  return b;
}

std::string_view type_name(const MessageBody& body) {
  return std::visit(
      Overloaded{
          [](const PublicKeyMsg&) { return std::string_view("public_key"); },
          [](const FeatureCatalog&) { return std::string_view("feature_catalog"); },
          [](const EncryptedGradients&) { return std::string_view("encrypted_gradients"); },
          [](const Ack&) { return std::string_view("ack"); },
          [](const AggregateRequest&) { return std::string_view("aggregate_request"); },
          [](const AggregatedHistograms&) { return std::string_view("aggregated_histograms"); },
          [](const SplitDecision&) { return std::string_view("split_decision"); },
          [](const PartitionResult&) { return std::string_view("partition_result"); },
          [](const RoutingQuery&) { return std::string_view("routing_query"); },
          [](const RoutingAnswer&) { return std::string_view("routing_answer"); },
          [](const Done&) { return std::string_view("done"); },
          [](const ErrorReply&) { return std::string_view("error"); },
      },
      body);
}

std::string encode_payload(const Message& msg) {
  json body = body_to_json(msg.body);
  if (msg.reply_to) body["reply_to"] = *msg.reply_to;
  json j = {{"v", kWireVersion}, {"seq", msg.seq}, {"type", type_name(msg.body)}, {"body", std::move(body)}};
  return j.dump();
}

Message decode_payload(std::string_view payload) {
  try {
    const json j = json::parse(payload);
    if (j.at("v").get<int>() != kWireVersion) throw ProtocolError("unsupported wire version");
    Message msg;
    msg.seq = j.at("seq").get<std::uint64_t>();
    const json& body = j.at("body");
    if (body.contains("reply_to")) msg.reply_to = body["reply_to"].get<std::uint64_t>();
    msg.body = body_from_json(j.at("type").get<std::string>(), body);
    return msg;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
}

std::string frame(std::string_view payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(payload);
  return out;
}

std::uint32_t frame_length(const unsigned char header[4]) {
  return (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
         (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
}

}  // namespace vfxgb::fed
