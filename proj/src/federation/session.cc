#include "vfxgb/federation/session.h"

#include <atomic>
#include <charconv>

#include "vfxgb/error.h"

namespace vfxgb::fed {

ChannelSpec ChannelSpec::parse(const std::string& text) {
  ChannelSpec spec;
  if (text == "inproc" || text == "lockstep") return spec;
  if (text == "queue" || text == "threads") {
    spec.kind = Kind::kThreaded;
    return spec;
  }
  if (text == "tcp") {
    spec.kind = Kind::kTcp;
    return spec;
  }
  if (text.rfind("tcp:", 0) == 0) {
    spec.kind = Kind::kTcp;
    const std::string addr = text.substr(4);
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw ConfigError("channel: expected tcp:HOST:PORT, got '" + text + "'");
    spec.host = addr.substr(0, colon);
    const std::string port = addr.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535 || spec.host.empty()) {
      throw ConfigError("channel: bad tcp address '" + addr + "'");
    }
    spec.port = static_cast<std::uint16_t>(value);
    return spec;
  }
  throw ConfigError("channel: unknown kind '" + text + "' (inproc, queue, tcp:HOST:PORT)");
}

std::string ChannelSpec::to_string() const {
  switch (kind) {
    case Kind::kLockstep: return "inproc";
    case Kind::kThreaded: return "queue";
    case Kind::kTcp: return "tcp:" + host + ":" + std::to_string(port);
  }
  return "inproc";
}

FederatedSession::FederatedSession(data::PartyView active, std::vector<data::PartyView> passive,
                                   FederationConfig config, ChannelSpec channel)
    : spec_(std::move(channel)), active_(std::move(active), config) {
  for (std::size_t p = 0; p < passive.size(); ++p) {
    training_features_.push_back(passive[p].features);
    passive_.push_back(std::make_unique<PassiveParty>(std::move(passive[p].features), config.params.num_buckets,
                                                      static_cast<int>(p) + 1));
  }
  failures_.resize(passive_.size());

  for (std::size_t p = 0; p < passive_.size(); ++p) {
    PassiveParty* pp = passive_[p].get();
    switch (spec_.kind) {
      case ChannelSpec::Kind::kLockstep:
        ap_side_.push_back(std::make_unique<LockstepTransport>(
            [pp](const std::string& payload) { return pp->handle_payload(payload); }));
        break;
      case ChannelSpec::Kind::kThreaded: {
        auto [a, b] = make_queue_pair();
        ap_side_.push_back(std::move(a));
        pp_side_.push_back(std::move(b));
        break;
      }
      case ChannelSpec::Kind::kTcp: {
        // Each party after the first listens on the next port.
        const std::uint16_t port = spec_.port == 0 ? 0 : static_cast<std::uint16_t>(spec_.port + p);
        TcpListener listener(spec_.host, port);
        ap_side_.push_back(tcp_connect(spec_.host, listener.port()));
        pp_side_.push_back(listener.accept());
        break;
      }
    }
    channels_.push_back(std::make_unique<Channel>(*ap_side_.back()));
  }
  start_threads();
}

FederatedSession::~FederatedSession() { shutdown(); }

void FederatedSession::start_threads() {
  if (pp_side_.empty()) return;
  for (std::size_t p = 0; p < passive_.size(); ++p) {
    threads_.emplace_back([this, p] {
      try {
        for (;;) passive_[p]->serve(*pp_side_[p]);
      } catch (...) {
        if (!stopping_) failures_[p] = std::current_exception();
      }
    });
  }
}

void FederatedSession::shutdown() {
  stopping_ = true;
  for (auto& t : ap_side_) t->close();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
}

void FederatedSession::rethrow_passive_failure() {
  for (auto& f : failures_) {
    if (f) std::rethrow_exception(f);
  }
}

void FederatedSession::set_trace(TraceFn trace) {
  for (std::size_t p = 0; p < channels_.size(); ++p) {
    if (!trace) {
      channels_[p]->set_trace(nullptr);
      continue;
    }
    channels_[p]->set_trace([trace, p](Direction d, const std::string& payload) {
      trace(static_cast<int>(p) + 1, d, payload);
    });
  }
}

TrainingResult FederatedSession::train() {
  std::vector<Channel*> chans;
  for (auto& c : channels_) chans.push_back(c.get());
  try {
    return active_.train(chans);
  } catch (...) {
    shutdown();
    rethrow_passive_failure();
    throw;
  }
}

std::vector<double> FederatedSession::predict(const xgb::BoostedModel& model,
                                              const xgb::FeatureMatrix& active_features,
                                              const std::vector<xgb::FeatureMatrix>& passive_features,
                                              PartyCosts* costs) {
  if (passive_features.size() != passive_.size()) {
    throw InvalidArgument("predict needs one feature matrix per passive party");
  }
  for (std::size_t p = 0; p < passive_.size(); ++p) {
    if (passive_features[p].num_rows() != active_features.num_rows()) {
      throw InvalidArgument("passive features are not row-aligned with the active features");
    }
    passive_[p]->set_inference_features(passive_features[p]);
  }
  std::vector<Channel*> chans;
  for (auto& c : channels_) chans.push_back(c.get());
  try {
    auto scores = active_.predict(model, active_features, chans, costs);
    for (std::size_t p = 0; p < passive_.size(); ++p) passive_[p]->set_inference_features(training_features_[p]);
    return scores;
  } catch (...) {
    shutdown();
    rethrow_passive_failure();
    throw;
  }
}

}  // namespace vfxgb::fed
