#pragma once

#include <stdexcept>
#include <string>

namespace vfxgb {

// Error categories surfaced through the C API status codes and CLI exit codes.
enum class ErrorKind {
  kInvalidArgument = 1,
  kConfig = 2,
  kOverflow = 3,
  kProtocol = 4,
  kIo = 5,
  kCrypto = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

// Raised when a decoded aggregate has its protection bits at '11' or beyond.
class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& what) : Error(ErrorKind::kOverflow, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorKind::kProtocol, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class CryptoError : public Error {
 public:
  explicit CryptoError(const std::string& what) : Error(ErrorKind::kCrypto, what) {}
};

}  // namespace vfxgb
