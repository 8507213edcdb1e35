#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retouch/a2l/transport.hpp"

namespace retouch::a2l {

/// Raised when the server answers a request with an ERR frame.
class RemoteError : public std::runtime_error {
 public:
  explicit RemoteError(Frame frame);
  const Frame& frame() const { return frame_; }
  const std::string& code() const;

 private:
  Frame frame_;
};

/// Blocking request/response wrapper over a connected transport.
class Client {
 public:
  explicit Client(Transport& transport) : stream_(transport), transport_(transport) {}

  const std::string& session() const { return session_; }

  /// HELLO -> WELCOME. Returns the fresh session id.
  std::string hello(const std::string& client_id);

  /// FILE + blob -> FILEOK. Digest and size are computed from `bytes`.
  void upload(const std::string& name, const std::vector<std::uint8_t>& bytes);

  /// Raw upload for fault injection: declares `digest`/`size` as given.
  Frame upload_raw(const std::string& name, const std::string& digest,
                   std::uint64_t size, const std::vector<std::uint8_t>& bytes);

  /// EXEC -> first STATUS ack.
  Frame exec(const std::string& job_id, const std::string& roc_file,
             const std::string& image_file, const std::string& seg_file = "");

  /// STATUS -> {state, progress}.
  struct Status {
    std::string state;
    int progress = 0;
  };
  Status status(const std::string& job_id);

  /// Polls STATUS until the job settles; throws RemoteError on ERROR jobs
  /// when fetching the result.
  Status wait(const std::string& job_id);

  struct Result {
    std::string name;
    std::string digest;
    std::vector<std::uint8_t> bytes;
  };
  Result result(const std::string& job_id);

  void bye();

  /// Sends one frame and returns the next reply (throws RemoteError on ERR).
  Frame roundtrip(const Frame& frame);
  /// Sends one frame and returns the raw reply, ERR included.
  Frame roundtrip_raw(const Frame& frame);

 private:
  FramedStream stream_;
  Transport& transport_;
  std::string session_{kNoSession};
};

}  // namespace retouch::a2l
