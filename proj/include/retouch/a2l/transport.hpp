#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retouch/a2l/frame.hpp"

namespace retouch::a2l {

class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& message);
};

/// Blocking bidirectional byte stream. Implementations: TCP sockets for the
/// service, an in-memory pipe pair for tests.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns the number of bytes read; 0 means EOF.
  virtual std::size_t read_some(void* buf, std::size_t max) = 0;
  virtual void write_all(const void* buf, std::size_t n) = 0;
  virtual void close() = 0;
};

/// Creates a connected in-memory duplex pair (client end, server end).
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_memory_pipe();

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(int fd);
  ~TcpTransport() override;
  std::size_t read_some(void* buf, std::size_t max) override;
  void write_all(const void* buf, std::size_t n) override;
  void close() override;

  static std::unique_ptr<Transport> connect(const std::string& host, std::uint16_t port);

 private:
  int fd_;
};

class TcpListener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  std::uint16_t port() const { return port_; }
  /// Blocks for the next connection; nullptr once the listener is closed.
  std::unique_ptr<Transport> accept();
  void close();

 private:
  int fd_;
  std::uint16_t port_ = 0;
};

/// Control frames plus length-prefixed binary blobs over one transport.
/// Blob framing: 8-byte big-endian length, then the payload bytes.
class FramedStream {
 public:
  explicit FramedStream(Transport& transport) : transport_(transport) {}

  /// Next control frame, or nullopt on EOF.
  std::optional<Frame> read_frame();
  void write_frame(const Frame& frame);

  std::vector<std::uint8_t> read_blob();
  void write_blob(const std::vector<std::uint8_t>& bytes);

 private:
  std::optional<std::string> read_line();
  bool fill();

  Transport& transport_;
  std::string buffer_;
};

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);

}  // namespace retouch::a2l
