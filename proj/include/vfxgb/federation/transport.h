#pragma once

// Byte transports carrying JSON payloads between parties, plus the
// message-level channel that numbers, encodes, and meters them.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "vfxgb/federation/messages.h"

namespace vfxgb::fed {

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::string payload) = 0;
  // Blocks until a payload arrives; throws ProtocolError/IoError when the
  // peer is gone.
  virtual std::string receive() = 0;
  // Unblocks a pending receive() on either side; further use throws.
  virtual void close() {}
};

// Thread-safe FIFO used by the in-process duplex link.
class PayloadQueue {
 public:
  void push(std::string payload);
  std::string pop();  // blocks
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> items_;
  bool closed_ = false;
};

// One endpoint of an in-process duplex queue.
class QueueTransport : public Transport {
 public:
  QueueTransport(std::shared_ptr<PayloadQueue> inbox, std::shared_ptr<PayloadQueue> outbox)
      : inbox_(std::move(inbox)), outbox_(std::move(outbox)) {}
  void send(std::string payload) override { outbox_->push(std::move(payload)); }
  std::string receive() override { return inbox_->pop(); }
  void close() override {
    inbox_->close();
    outbox_->close();
  }

 private:
  std::shared_ptr<PayloadQueue> inbox_;
  std::shared_ptr<PayloadQueue> outbox_;
};

std::pair<std::unique_ptr<QueueTransport>, std::unique_ptr<QueueTransport>> make_queue_pair();

// Single-threaded link: send() hands the payload to `handler` immediately and
// queues whatever it returns for the next receive().
class LockstepTransport : public Transport {
 public:
  using Handler = std::function<std::string(const std::string&)>;
  explicit LockstepTransport(Handler handler) : handler_(std::move(handler)) {}
  void send(std::string payload) override;
  std::string receive() override;

 private:
  Handler handler_;
  std::deque<std::string> replies_;
};

// Length-prefixed frames over a connected TCP socket.
class TcpTransport : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {}
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  void send(std::string payload) override;
  std::string receive() override;
  void close() override;

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  // port 0 picks an ephemeral port.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<TcpTransport> accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<TcpTransport> tcp_connect(const std::string& host, std::uint16_t port);

enum class Direction { kOutgoing, kIncoming };

// Message-level view of a transport: assigns sequence numbers, meters bytes
// and time, and optionally records the payload trace.
class Channel {
 public:
  using TraceFn = std::function<void(Direction, const std::string& payload)>;

  explicit Channel(Transport& transport) : transport_(&transport) {}

  // Returns the sequence number assigned to the message.
  std::uint64_t send(MessageBody body, std::optional<std::uint64_t> reply_to = std::nullopt);
  Message receive();

  void set_trace(TraceFn trace) { trace_ = std::move(trace); }

  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t frame_bytes_sent() const { return frame_bytes_sent_; }
  std::uint64_t frame_bytes_received() const { return frame_bytes_received_; }
  // Time spent serializing and parsing payloads.
  double transfer_seconds() const { return transfer_seconds_; }

 private:
  Transport* transport_;
  TraceFn trace_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t frame_bytes_sent_ = 0;
  std::uint64_t frame_bytes_received_ = 0;
  double transfer_seconds_ = 0.0;
};

}  // namespace vfxgb::fed
