#include "vfxgb/federation/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "vfxgb/error.h"

namespace vfxgb::fed {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_all(int fd, const char* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("socket write failed: ") + std::strerror(errno));
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

void read_all(int fd, char* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::recv(fd, data, size, 0);
    if (n == 0) throw ProtocolError("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("socket read failed: ") + std::strerror(errno));
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw IoError("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

void PayloadQueue::push(std::string payload) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) throw ProtocolError("queue closed");
    items_.push_back(std::move(payload));
  }
  cv_.notify_one();
}

std::string PayloadQueue::pop() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
  if (items_.empty()) throw ProtocolError("queue closed");
  std::string out = std::move(items_.front());
  items_.pop_front();
  return out;
}

void PayloadQueue::close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::pair<std::unique_ptr<QueueTransport>, std::unique_ptr<QueueTransport>> make_queue_pair() {
  auto a_to_b = std::make_shared<PayloadQueue>();
  auto b_to_a = std::make_shared<PayloadQueue>();
  return {std::make_unique<QueueTransport>(b_to_a, a_to_b), std::make_unique<QueueTransport>(a_to_b, b_to_a)};
}

void LockstepTransport::send(std::string payload) { replies_.push_back(handler_(payload)); }

std::string LockstepTransport::receive() {
  if (replies_.empty()) throw ProtocolError("lockstep receive with no pending reply");
  std::string out = std::move(replies_.front());
  replies_.pop_front();
  return out;
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpTransport::send(std::string payload) {
  const std::string f = frame(payload);
  write_all(fd_, f.data(), f.size());
}

std::string TcpTransport::receive() {
  unsigned char header[4];
  read_all(fd_, reinterpret_cast<char*>(header), 4);
  std::string payload(frame_length(header), '\0');
  read_all(fd_, payload.data(), payload.size());
  return payload;
}

void TcpTransport::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw IoError("cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpTransport> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      set_nodelay(fd);
      return std::make_unique<TcpTransport>(fd);
    }
    if (errno != EINTR) throw IoError(std::string("accept: ") + std::strerror(errno));
  }
}

std::unique_ptr<TcpTransport> tcp_connect(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = resolve(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw IoError("cannot connect to " + host + ":" + std::to_string(port) + ": " + err);
  }
  set_nodelay(fd);
  return std::make_unique<TcpTransport>(fd);
}

std::uint64_t Channel::send(MessageBody body, std::optional<std::uint64_t> reply_to) {
  const auto start = Clock::now();
  Message msg{next_seq_++, reply_to, std::move(body)};
  std::string payload = encode_payload(msg);
  transfer_seconds_ += seconds_since(start);
  ++messages_sent_;
  frame_bytes_sent_ += payload.size() + 4;
  if (trace_) trace_(Direction::kOutgoing, payload);
  transport_->send(std::move(payload));
  return msg.seq;
}

Message Channel::receive() {
  std::string payload = transport_->receive();
  const auto start = Clock::now();
  frame_bytes_received_ += payload.size() + 4;
  if (trace_) trace_(Direction::kIncoming, payload);
  Message msg = decode_payload(payload);
  transfer_seconds_ += seconds_since(start);
  return msg;
}

}  // namespace vfxgb::fed
