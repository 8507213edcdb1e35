#include "retouch/a2l/client.hpp"

#include <chrono>
#include <thread>

namespace retouch::a2l {

namespace {

std::string describe(const Frame& frame) {
  std::string out = "server error";
  for (const std::string& f : frame.fields) out += " " + f;
  return out;
}

}  // namespace

RemoteError::RemoteError(Frame frame)
    : std::runtime_error(describe(frame)), frame_(std::move(frame)) {}

const std::string& RemoteError::code() const {
  static const std::string kUnknown = "?";
  return frame_.fields.empty() ? kUnknown : frame_.fields[0];
}

Frame Client::roundtrip_raw(const Frame& frame) {
  stream_.write_frame(frame);
  auto reply = stream_.read_frame();
  if (!reply) throw TransportError("connection closed mid-request");
  return *reply;
}

Frame Client::roundtrip(const Frame& frame) {
  Frame reply = roundtrip_raw(frame);
  if (reply.verb == Verb::err) throw RemoteError(std::move(reply));
  return reply;
}

std::string Client::hello(const std::string& client_id) {
  const Frame reply =
      roundtrip(make_frame(Verb::hello, std::string(kNoSession), {client_id}));
  if (reply.verb != Verb::welcome)
    throw TransportError("expected WELCOME, got " +
                         std::string(verb_name(reply.verb)));
  session_ = reply.session;
  return session_;
}

void Client::upload(const std::string& name, const std::vector<std::uint8_t>& bytes) {
  const Frame reply = upload_raw(name, sha256_hex(bytes), bytes.size(), bytes);
  if (reply.verb == Verb::err) throw RemoteError(reply);
  if (reply.verb != Verb::fileok)
    throw TransportError("expected FILEOK, got " +
                         std::string(verb_name(reply.verb)));
}

Frame Client::upload_raw(const std::string& name, const std::string& digest,
                         std::uint64_t size, const std::vector<std::uint8_t>& bytes) {
  stream_.write_frame(make_frame(Verb::file, session_,
                                 {name, digest, std::to_string(size)}));
  stream_.write_blob(bytes);
  auto reply = stream_.read_frame();
  if (!reply) throw TransportError("connection closed mid-upload");
  return *reply;
}

Frame Client::exec(const std::string& job_id, const std::string& roc_file,
                   const std::string& image_file, const std::string& seg_file) {
  std::vector<std::string> fields{job_id, roc_file, image_file};
  if (!seg_file.empty()) fields.push_back(seg_file);
  return roundtrip(make_frame(Verb::exec, session_, std::move(fields)));
}

Client::Status Client::status(const std::string& job_id) {
  const Frame reply = roundtrip(make_frame(Verb::status, session_, {job_id}));
  if (reply.verb != Verb::status || reply.fields.size() != 3)
    throw TransportError("malformed STATUS reply");
  return Status{reply.fields[1], std::stoi(reply.fields[2])};
}

Client::Status Client::wait(const std::string& job_id) {
  for (;;) {
    const Status s = status(job_id);
    if (s.state == "DONE" || s.state == "ERROR") return s;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

Client::Result Client::result(const std::string& job_id) {
  const Frame reply = roundtrip(make_frame(Verb::result, session_, {job_id}));
  if (reply.verb != Verb::result || reply.fields.size() != 4)
    throw TransportError("malformed RESULT reply");
  Result out;
  out.name = reply.fields[1];
  out.digest = reply.fields[2];
  out.bytes = stream_.read_blob();
  if (out.bytes.size() != std::stoull(reply.fields[3]))
    throw TransportError("RESULT blob size mismatch");
  return out;
}

void Client::bye() {
  const Frame reply = roundtrip(make_frame(Verb::bye, session_));
  if (reply.verb != Verb::bye)
    throw TransportError("expected BYE, got " + std::string(verb_name(reply.verb)));
}

}  // namespace retouch::a2l
