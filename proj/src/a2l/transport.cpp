#include "retouch/a2l/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

namespace retouch::a2l {

TransportError::TransportError(const std::string& message)
    : std::runtime_error("TransportError: " + message) {}

// ---------------------------------------------------------------------------
// In-memory pipe
// ---------------------------------------------------------------------------

namespace {

struct ByteQueue {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::uint8_t> bytes;
  bool closed = false;

  void push(const void* buf, std::size_t n) {
    {
      std::lock_guard lock(mutex);
      if (closed) throw TransportError("pipe closed");
      const auto* p = static_cast<const std::uint8_t*>(buf);
      bytes.insert(bytes.end(), p, p + n);
    }
    ready.notify_all();
  }

  std::size_t pop(void* buf, std::size_t max) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return !bytes.empty() || closed; });
    if (bytes.empty()) return 0;  // closed and drained
    const std::size_t n = std::min(max, bytes.size());
    auto* p = static_cast<std::uint8_t*>(buf);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = bytes.front();
      bytes.pop_front();
    }
    return n;
  }

  void close() {
    {
      std::lock_guard lock(mutex);
      closed = true;
    }
    ready.notify_all();
  }
};

class MemoryTransport : public Transport {
 public:
  MemoryTransport(std::shared_ptr<ByteQueue> in, std::shared_ptr<ByteQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryTransport() override { close(); }

  std::size_t read_some(void* buf, std::size_t max) override {
    return in_->pop(buf, max);
  }
  void write_all(const void* buf, std::size_t n) override { out_->push(buf, n); }
  void close() override {
    in_->close();
    out_->close();
  }

 private:
  std::shared_ptr<ByteQueue> in_, out_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_memory_pipe() {
  auto a = std::make_shared<ByteQueue>();
  auto b = std::make_shared<ByteQueue>();
  return {std::make_unique<MemoryTransport>(a, b),
          std::make_unique<MemoryTransport>(b, a)};
}

// ---------------------------------------------------------------------------
// TCP
// ---------------------------------------------------------------------------

TcpTransport::TcpTransport(int fd) : fd_(fd) {
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpTransport::~TcpTransport() { close(); }

std::size_t TcpTransport::read_some(void* buf, std::size_t max) {
  if (fd_ < 0) return 0;
  for (;;) {
    const ssize_t n = ::recv(fd_, buf, max, 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    return 0;  // treat connection errors as EOF
  }
}

void TcpTransport::write_all(const void* buf, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(buf);
  while (n > 0) {
    const ssize_t written = ::send(fd_, p, n, MSG_NOSIGNAL);
    if (written < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("send: ") + std::strerror(errno));
    }
    p += written;
    n -= static_cast<std::size_t>(written);
  }
}

void TcpTransport::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<Transport> TcpTransport::connect(const std::string& host,
                                                 std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw TransportError("bad address '" + host + "'");
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    throw TransportError(std::string("connect: ") + std::strerror(err));
  }
  return std::make_unique<TcpTransport>(fd);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw TransportError("bad address '" + host + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 64) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw TransportError(std::string("bind/listen: ") + std::strerror(err));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<Transport> TcpListener::accept() {
  if (fd_ < 0) return nullptr;
  for (;;) {
    const int client = ::accept(fd_, nullptr, nullptr);
    if (client >= 0) return std::make_unique<TcpTransport>(client);
    if (errno == EINTR) continue;
    return nullptr;
  }
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

// ---------------------------------------------------------------------------
// FramedStream
// ---------------------------------------------------------------------------

bool FramedStream::fill() {
  char chunk[4096];
  const std::size_t n = transport_.read_some(chunk, sizeof(chunk));
  if (n == 0) return false;
  buffer_.append(chunk, n);
  return true;
}

std::optional<std::string> FramedStream::read_line() {
  for (;;) {
    const std::size_t pos = buffer_.find('\n');
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos + 1);
      buffer_.erase(0, pos + 1);
      return line;
    }
    if (!fill()) return std::nullopt;
  }
}

std::optional<Frame> FramedStream::read_frame() {
  const auto line = read_line();
  if (!line) return std::nullopt;
  return decode_frame(*line);
}

void FramedStream::write_frame(const Frame& frame) {
  const std::string wire = encode_frame(frame);
  transport_.write_all(wire.data(), wire.size());
}

std::vector<std::uint8_t> FramedStream::read_blob() {
  while (buffer_.size() < 8) {
    if (!fill()) throw TransportError("EOF inside blob length");
  }
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i)
    n = (n << 8) | static_cast<std::uint8_t>(buffer_[i]);
  buffer_.erase(0, 8);
  while (buffer_.size() < n) {
    if (!fill()) throw TransportError("EOF inside blob payload");
  }
  std::vector<std::uint8_t> bytes(buffer_.begin(),
                                  buffer_.begin() + static_cast<long>(n));
  buffer_.erase(0, static_cast<std::size_t>(n));
  return bytes;
}

void FramedStream::write_blob(const std::vector<std::uint8_t>& bytes) {
  std::uint8_t header[8];
  const std::uint64_t n = bytes.size();
  for (int i = 0; i < 8; ++i)
    header[i] = static_cast<std::uint8_t>(n >> (8 * (7 - i)));
  transport_.write_all(header, sizeof(header));
  if (!bytes.empty()) transport_.write_all(bytes.data(), bytes.size());
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw TransportError("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace retouch::a2l
