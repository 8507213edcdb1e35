#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "retouch/a2l/transport.hpp"
#include "retouch/render.hpp"
#include "retouch/roc.hpp"

namespace retouch::a2l {

enum class JobStatus { pending, running, done, error };
const char* job_status_name(JobStatus status);

struct JobState {
  std::string job_id;
  std::string roc_file;
  std::string image_file;
  std::string seg_file;  // empty when absent
  JobStatus status = JobStatus::pending;
  int progress = 0;  // 0..100, non-decreasing
  std::string result_name;                 // set iff status == done
  std::vector<std::uint8_t> result_bytes;  // encoded PNG
  std::string result_digest;
  std::string script;  // retained ROC-to-Lua translation
  std::string error_code;
  std::string error_message;
};

struct ServerConfig {
  ToolCatalog catalog;
  RenderOptions render;  // mask tolerances; segmentation comes per job
  std::size_t workers = 0;  // 0 -> hardware_concurrency
  std::chrono::milliseconds job_timeout{30000};
  std::uint64_t max_job_pixels = 1ull << 26;  // per-job decoded-pixel cap
  std::function<std::string()> session_id_gen;  // default: random hex
};

/// One A2L endpoint. Each connection is one session; command processing is
/// serialized per connection while jobs run on the shared worker pool.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();

  /// Handles one connection until BYE or EOF. Call from its own thread
  /// when serving several connections.
  void serve(Transport& transport);

  /// Blocks until every queued or running job has settled.
  void wait_idle();

 private:
  struct Session;
  struct Pool;

  void handle_connection(FramedStream& stream);
  void run_job(std::shared_ptr<Session> session, std::string job_id);

  ServerConfig config_;
  std::unique_ptr<Pool> pool_;
};

/// Accept loop: serves every connection on `listener` until it is closed.
/// `max_sessions` of 0 means unlimited.
void serve_tcp(Server& server, TcpListener& listener, std::size_t max_sessions = 0);

}  // namespace retouch::a2l
