#include "retouch/a2l/server.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "retouch/a2l/script.hpp"
#include "retouch/png_io.hpp"

namespace retouch::a2l {

const char* job_status_name(JobStatus status) {
  switch (status) {
    case JobStatus::pending: return "PENDING";
    case JobStatus::running: return "RUNNING";
    case JobStatus::done: return "DONE";
    case JobStatus::error: return "ERROR";
  }
  return "?";
}

namespace {

struct StoredFile {
  std::vector<std::uint8_t> bytes;
  std::string digest;
  bool verified = false;
};

std::string random_session_id() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  std::uint64_t a = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  a ^= counter.fetch_add(1) * 0x9e3779b97f4a7c15ull;
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 15; i >= 0; --i) out += hex[(a >> (i * 4)) & 0xF];
  return out;
}

}  // namespace

struct Server::Session {
  std::mutex mutex;
  std::string id;
  std::string client_id;
  std::map<std::string, StoredFile> files;
  std::map<std::string, JobState> jobs;
};

struct Server::Pool {
  std::mutex mutex;
  std::condition_variable work_ready;
  std::condition_variable idle;
  std::deque<std::function<void()>> tasks;
  std::size_t active = 0;
  bool shutdown = false;
  std::vector<std::thread> threads;

  explicit Pool(std::size_t workers) {
    for (std::size_t i = 0; i < workers; ++i)
      threads.emplace_back([this] { run(); });
  }

  ~Pool() {
    {
      std::lock_guard lock(mutex);
      shutdown = true;
    }
    work_ready.notify_all();
    for (auto& t : threads) t.join();
  }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mutex);
      tasks.push_back(std::move(task));
    }
    work_ready.notify_one();
  }

  void run() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mutex);
        work_ready.wait(lock, [&] { return shutdown || !tasks.empty(); });
        if (tasks.empty()) return;
        task = std::move(tasks.front());
        tasks.pop_front();
        ++active;
      }
      task();
      {
        std::lock_guard lock(mutex);
        --active;
      }
      idle.notify_all();
    }
  }

  void wait_idle() {
    std::unique_lock lock(mutex);
    idle.wait(lock, [&] { return tasks.empty() && active == 0; });
  }
};

Server::Server(ServerConfig config) : config_(std::move(config)) {
  std::size_t workers = config_.workers;
  if (workers == 0)
    workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  pool_ = std::make_unique<Pool>(workers);
  if (!config_.session_id_gen) config_.session_id_gen = random_session_id;
}

Server::~Server() = default;

void Server::wait_idle() { pool_->wait_idle(); }

void Server::serve(Transport& transport) {
  FramedStream stream(transport);
  handle_connection(stream);
}

void Server::handle_connection(FramedStream& stream) {
  std::shared_ptr<Session> session;

  auto send = [&](const Frame& frame) { stream.write_frame(frame); };

  for (;;) {
    std::optional<Frame> frame;
    try {
      frame = stream.read_frame();
    } catch (const FrameError& e) {
      send(make_error(session ? session->id : std::string(kNoSession), "PROTO",
                      e.what()));
      continue;
    }
    if (!frame) return;  // EOF

    // Stage 1: handshake.
    if (!session) {
      if (frame->verb != Verb::hello) {
        send(make_error(kNoSession.data(), "NOSESSION",
                        "handshake required before commands"));
        continue;
      }
      if (frame->fields.size() != 1 || frame->fields[0].empty()) {
        send(make_error(kNoSession.data(), "PROTO",
                        "HELLO needs exactly one client id"));
        continue;
      }
      session = std::make_shared<Session>();
      session->id = config_.session_id_gen();
      session->client_id = frame->fields[0];
      send(make_frame(Verb::welcome, session->id));
      continue;
    }

    const std::string& sid = session->id;
    if (frame->session != sid && frame->verb != Verb::hello) {
      send(make_error(sid, "PROTO", "frame addresses a different session"));
      continue;
    }

    switch (frame->verb) {
      case Verb::hello: {
        send(make_error(sid, "PROTO", "session already open"));
        break;
      }

      // Stage 2: file verification. Content follows as one blob.
      case Verb::file: {
        if (frame->fields.size() != 3) {
          send(make_error(sid, "PROTO", "FILE needs name, digest, size"));
          break;
        }
        const std::string& name = frame->fields[0];
        std::string digest = frame->fields[1];
        std::transform(digest.begin(), digest.end(), digest.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        std::uint64_t declared = 0;
        try {
          declared = std::stoull(frame->fields[2]);
        } catch (...) {
          send(make_error(sid, "PROTO", "FILE size is not a number"));
          break;
        }
        std::vector<std::uint8_t> bytes;
        try {
          bytes = stream.read_blob();
        } catch (const TransportError& e) {
          send(make_error(sid, "IO", e.what()));
          return;
        }
        if (bytes.size() != declared) {
          send(make_error(sid, "SIZE",
                          "declared " + frame->fields[2] + " bytes, received " +
                              std::to_string(bytes.size())));
          break;
        }
        const std::string actual = sha256_hex(bytes);
        if (actual != digest) {
          send(make_error(sid, "DIGEST", "content hashes to " + actual));
          break;
        }
        {
          std::lock_guard lock(session->mutex);
          session->files[name] = StoredFile{std::move(bytes), actual, true};
        }
        send(make_frame(Verb::fileok, sid, {name}));
        break;
      }

      // Stage 3+4: sandboxed execution, asynchronous processing.
      case Verb::exec: {
        if (frame->fields.size() != 3 && frame->fields.size() != 4) {
          send(make_error(sid, "PROTO",
                          "EXEC needs job, roc file, image file[, seg file]"));
          break;
        }
        const std::string& job_id = frame->fields[0];
        std::vector<std::string> needed(frame->fields.begin() + 1,
                                        frame->fields.end());
        {
          std::lock_guard lock(session->mutex);
          bool unverified = false;
          for (const std::string& name : needed) {
            const auto it = session->files.find(name);
            if (it == session->files.end() || !it->second.verified) {
              send(make_error(sid, "UNVERIFIED", "file '" + name + "' not verified"));
              unverified = true;
              break;
            }
          }
          if (unverified) break;
          if (session->jobs.count(job_id)) {
            send(make_error(sid, "DUPJOB", "job '" + job_id + "' already exists"));
            break;
          }
          JobState job;
          job.job_id = job_id;
          job.roc_file = frame->fields[1];
          job.image_file = frame->fields[2];
          if (frame->fields.size() == 4) job.seg_file = frame->fields[3];
          session->jobs.emplace(job_id, std::move(job));
        }
        pool_->submit([this, session, job_id] { run_job(session, job_id); });
        send(make_frame(Verb::status, sid, {job_id, "PENDING", "0"}));
        break;
      }

      case Verb::status: {
        if (frame->fields.size() != 1) {
          send(make_error(sid, "PROTO", "STATUS needs a job id"));
          break;
        }
        std::lock_guard lock(session->mutex);
        const auto it = session->jobs.find(frame->fields[0]);
        if (it == session->jobs.end()) {
          send(make_error(sid, "NOJOB", "no job '" + frame->fields[0] + "'"));
          break;
        }
        send(make_frame(Verb::status, sid,
                        {it->second.job_id, job_status_name(it->second.status),
                         std::to_string(it->second.progress)}));
        break;
      }

      // Stage 5: result return.
      case Verb::result: {
        if (frame->fields.size() != 1) {
          send(make_error(sid, "PROTO", "RESULT needs a job id"));
          break;
        }
        JobState snapshot;
        {
          std::lock_guard lock(session->mutex);
          const auto it = session->jobs.find(frame->fields[0]);
          if (it == session->jobs.end()) {
            send(make_error(sid, "NOJOB", "no job '" + frame->fields[0] + "'"));
            break;
          }
          snapshot = it->second;
        }
        if (snapshot.status == JobStatus::error) {
          send(make_frame(Verb::err, sid,
                          {"EXEC", snapshot.error_code, snapshot.error_message}));
          break;
        }
        if (snapshot.status != JobStatus::done) {
          send(make_error(sid, "NOTDONE", "job is " +
                              std::string(job_status_name(snapshot.status))));
          break;
        }
        send(make_frame(Verb::result, sid,
                        {snapshot.job_id, snapshot.result_name,
                         snapshot.result_digest,
                         std::to_string(snapshot.result_bytes.size())}));
        stream.write_blob(snapshot.result_bytes);
        break;
      }

      case Verb::bye: {
        send(make_frame(Verb::bye, sid));
        return;
      }

      default:
        send(make_error(sid, "PROTO",
                        std::string("unexpected verb ") + verb_name(frame->verb)));
        break;
    }
  }
}

void Server::run_job(std::shared_ptr<Session> session, std::string job_id) {
  auto set_progress = [&](JobStatus status, int progress) {
    std::lock_guard lock(session->mutex);
    auto& job = session->jobs.at(job_id);
    job.status = status;
    job.progress = std::max(job.progress, progress);
  };
  auto set_error = [&](const std::string& code, const std::string& message) {
    std::lock_guard lock(session->mutex);
    auto& job = session->jobs.at(job_id);
    job.status = JobStatus::error;
    job.error_code = code;
    job.error_message = message;
  };

  std::vector<std::uint8_t> roc_bytes, img_bytes, seg_bytes;
  bool has_seg = false;
  {
    std::lock_guard lock(session->mutex);
    const auto& job = session->jobs.at(job_id);
    roc_bytes = session->files.at(job.roc_file).bytes;
    img_bytes = session->files.at(job.image_file).bytes;
    if (!job.seg_file.empty()) {
      seg_bytes = session->files.at(job.seg_file).bytes;
      has_seg = true;
    }
  }

  const auto deadline = std::chrono::steady_clock::now() + config_.job_timeout;
  try {
    set_progress(JobStatus::running, 5);

    const RocDocument doc = parse_roc(
        std::string_view(reinterpret_cast<const char*>(roc_bytes.data()),
                         roc_bytes.size()),
        config_.catalog);
    set_progress(JobStatus::running, 25);

    const std::string script = translate_roc_to_script(doc, config_.catalog);
    {
      std::lock_guard lock(session->mutex);
      session->jobs.at(job_id).script = script;
    }
    set_progress(JobStatus::running, 40);

    const Image src = decode_png(img_bytes);
    if (static_cast<std::uint64_t>(src.pixels()) > config_.max_job_pixels) {
      set_error("MEMORY", "image exceeds the per-job pixel cap");
      return;
    }
    Segmentation seg;
    if (has_seg) seg = decode_segmentation(seg_bytes);
    set_progress(JobStatus::running, 55);

    RenderOptions options = config_.render;
    options.deadline = deadline;
    options.segmentation = has_seg ? &seg : nullptr;
    const Image out = apply_roc(src, doc, options);
    set_progress(JobStatus::running, 85);

    std::vector<std::uint8_t> bytes = encode_png(out);
    std::string digest = sha256_hex(bytes);
    {
      std::lock_guard lock(session->mutex);
      auto& job = session->jobs.at(job_id);
      job.result_name = job_id + ".png";
      job.result_bytes = std::move(bytes);
      job.result_digest = std::move(digest);
      job.status = JobStatus::done;
      job.progress = 100;
    }
  } catch (const RocError& e) {
    set_error("PARSE", e.what());
  } catch (const ScriptError& e) {
    set_error("TRANSLATE", e.what());
  } catch (const RenderError& e) {
    if (e.code() == RenderErrc::timeout) set_error("TIMEOUT", e.what());
    else set_error("RENDER", e.what());
  } catch (const IoError& e) {
    set_error("IO", e.what());
  } catch (const std::exception& e) {
    set_error("INTERNAL", e.what());
  }
}

void serve_tcp(Server& server, TcpListener& listener, std::size_t max_sessions) {
  std::vector<std::thread> connections;
  std::size_t served = 0;
  for (;;) {
    auto transport = listener.accept();
    if (!transport) break;
    connections.emplace_back(
        [&server, t = std::shared_ptr<Transport>(std::move(transport))] {
          server.serve(*t);
        });
    if (max_sessions != 0 && ++served >= max_sessions) break;
  }
  for (auto& t : connections) t.join();
}

}  // namespace retouch::a2l
