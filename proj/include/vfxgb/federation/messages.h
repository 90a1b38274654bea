#pragma once

// Wire protocol between the Active Party and Passive Parties.
//
// Frame: 4-byte big-endian payload length, then a UTF-8 JSON object
//   {"v": 1, "seq": <int>, "type": <string>, "body": {...}}
// Replies carry "reply_to": <request seq> inside the body. Big integers are
// lowercase big-endian hex; instance bitmaps are base64 little-endian bit
// arrays with an explicit bit count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vfxgb::fed {

inline constexpr int kWireVersion = 1;

enum class GradientMode { kBatched, kPerValue };

std::string_view to_string(GradientMode mode);
GradientMode parse_gradient_mode(std::string_view s);  // "batched" | "per_value" | "per-value"

class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t size) : size_(size), bytes_((size + 7) / 8, 0) {}

  static Bitmap from_rows(std::size_t size, const std::vector<std::uint32_t>& rows);

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1U; }
  void set(std::size_t i) { bytes_[i / 8] |= static_cast<std::uint8_t>(1U << (i % 8)); }
  std::size_t count() const;
  std::vector<std::uint32_t> rows() const;

  std::string to_base64() const;
  static Bitmap from_base64(std::string_view text, std::size_t size);

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint8_t> bytes_;
};

struct PublicKeyMsg {
  std::string n_hex;
  int bits = 0;
};

// Passive Party reply to PublicKeyMsg: bucket count per owned feature.
struct FeatureCatalog {
  int party = 0;
  std::vector<int> buckets;
};

struct EncryptedGradients {
  int tree = 0;
  GradientMode mode = GradientMode::kBatched;
  // batched: one per instance; per_value: g_0, h_0, g_1, h_1, ...
  std::vector<std::string> ciphertexts;
};

struct Ack {};

struct AggregateRequest {
  int tree = 0;
  int node = 0;
  Bitmap instances;
  std::vector<int> features;
};

struct BucketAggregate {
  std::uint64_t count = 0;
  std::vector<std::string> ciphertexts;  // 1 (batched) or 2 (per_value: g, h)
};

struct FeatureHistogram {
  int feature = 0;
  std::vector<BucketAggregate> buckets;
};

struct AggregatedHistograms {
  int node = 0;
  std::vector<FeatureHistogram> features;
};

struct SplitDecision {
  int node = 0;
  int feature = 0;
  int threshold_index = 0;
};

struct PartitionResult {
  int node = 0;
  std::uint64_t lookup_id = 0;
  Bitmap left;
};

struct RoutingQuery {
  std::uint64_t lookup_id = 0;
  std::uint64_t row = 0;
};

struct RoutingAnswer {
  bool left = false;
};

// Ends a session; the Passive Party's reply carries its cost counters as JSON.
struct Done {
  std::string costs_json;
};

struct ErrorReply {
  std::string message;
};

using MessageBody =
    std::variant<PublicKeyMsg, FeatureCatalog, EncryptedGradients, Ack, AggregateRequest,
                 AggregatedHistograms, SplitDecision, PartitionResult, RoutingQuery, RoutingAnswer,
                 Done, ErrorReply>;

struct Message {
  std::uint64_t seq = 0;
  std::optional<std::uint64_t> reply_to;
  MessageBody body;
};

std::string_view type_name(const MessageBody& body);

// JSON payload without the length prefix.
std::string encode_payload(const Message& msg);
// Throws ProtocolError on malformed or unknown-version payloads.
Message decode_payload(std::string_view payload);

// Length-prefixed frame helpers.
std::string frame(std::string_view payload);
std::uint32_t frame_length(const unsigned char header[4]);

}  // namespace vfxgb::fed
