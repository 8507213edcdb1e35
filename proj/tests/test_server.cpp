#include <doctest.h>

#include <atomic>
#include <thread>

#include "oracles.hpp"
#include "retouch/a2l/client.hpp"
#include "retouch/a2l/server.hpp"
#include "retouch/png_io.hpp"
#include "retouch/render.hpp"

using namespace retouch;
using namespace retouch::a2l;

namespace {

ServerConfig test_config() {
  ServerConfig config;
  config.catalog = oracles::shipped_catalog();
  config.workers = 4;
  int counter = 0;
  config.session_id_gen = [counter]() mutable {
    return "s" + std::to_string(counter++);
  };
  return config;
}

/// One in-memory connection served on a background thread.
struct Connection {
  std::unique_ptr<Transport> client_end;
  std::unique_ptr<Transport> server_end;
  std::thread thread;
  Client client;

  explicit Connection(Server& server)
      : Connection(server, make_memory_pipe()) {}

  Connection(Server& server,
             std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> pipe)
      : client_end(std::move(pipe.first)),
        server_end(std::move(pipe.second)),
        thread([&server, t = server_end.get()] { server.serve(*t); }),
        client(*client_end) {}

  ~Connection() {
    client_end->close();
    thread.join();
  }
};

std::vector<std::uint8_t> to_bytes(const std::string& s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("handshake produces fresh sessions") {
  Server server(test_config());
  {
    Connection a(server);
    Connection b(server);
    const std::string sa = a.client.hello("alpha");
    const std::string sb = b.client.hello("beta");
    CHECK(sa != sb);
    a.client.bye();
    b.client.bye();
  }
}

TEST_CASE("commands before HELLO are rejected") {
  Server server(test_config());
  Connection c(server);
  const Frame reply = c.client.roundtrip_raw(
      make_frame(Verb::exec, "-", {"job", "roc", "img"}));
  CHECK(reply.verb == Verb::err);
  CHECK(reply.fields[0] == "NOSESSION");
}

TEST_CASE("repeated HELLO is a protocol error") {
  Server server(test_config());
  Connection c(server);
  c.client.hello("alpha");
  const Frame reply = c.client.roundtrip_raw(
      make_frame(Verb::hello, "-", {"alpha"}));
  CHECK(reply.verb == Verb::err);
  CHECK(reply.fields[0] == "PROTO");
}

TEST_CASE("file verification") {
  Server server(test_config());
  Connection c(server);
  c.client.hello("uploader");

  const auto bytes = to_bytes(R"({"tools":[]})");

  SUBCASE("correct digest and size") {
    c.client.upload("doc.json", bytes);  // throws on failure
  }

  SUBCASE("flipped content byte fails the digest check") {
    auto flipped = bytes;
    flipped[3] ^= 0x01;
    const Frame reply =
        c.client.upload_raw("doc.json", sha256_hex(bytes), bytes.size(), flipped);
    CHECK(reply.verb == Verb::err);
    CHECK(reply.fields[0] == "DIGEST");
  }

  SUBCASE("size off by one") {
    const Frame reply =
        c.client.upload_raw("doc.json", sha256_hex(bytes), bytes.size() + 1, bytes);
    CHECK(reply.verb == Verb::err);
    CHECK(reply.fields[0] == "SIZE");
  }
}

TEST_CASE("job lifecycle happy path") {
  Server server(test_config());
  Connection c(server);
  c.client.hello("worker");

  const Image src = oracles::test_card(32, 32);
  const auto roc = to_bytes(
      R"({"tools":[{"name":"Exposure","params":{"value":1.0}}]})");
  c.client.upload("edit.roc", roc);
  c.client.upload("src.png", encode_png(src));

  const Frame ack = c.client.exec("job-1", "edit.roc", "src.png");
  CHECK(ack.verb == Verb::status);
  CHECK(ack.fields[1] == "PENDING");

  const Client::Status final = c.client.wait("job-1");
  CHECK(final.state == "DONE");
  CHECK(final.progress == 100);

  const Client::Result result = c.client.result("job-1");
  CHECK(result.name == "job-1.png");
  CHECK(sha256_hex(result.bytes) == result.digest);

  // The server adds nothing to the pixel path.
  const auto catalog = oracles::shipped_catalog();
  const RocDocument doc = parse_roc(R"({"tools":[{"name":"Exposure","params":{"value":1.0}}]})", catalog);
  const std::vector<std::uint8_t> direct = encode_png(apply_roc(src, doc));
  CHECK(result.digest == sha256_hex(direct));
  CHECK(result.bytes == direct);

  c.client.bye();
}

TEST_CASE("job error paths") {
  Server server(test_config());
  Connection c(server);
  c.client.hello("worker");

  const Image src = oracles::test_card(16, 16);
  c.client.upload("src.png", encode_png(src));
  c.client.upload("bad.roc", to_bytes(R"({"tools":[{"name":"Nope"}]})"));

  SUBCASE("unverified file") {
    const Frame reply = c.client.roundtrip_raw(
        make_frame(Verb::exec, c.client.session(), {"j", "ghost.roc", "src.png"}));
    CHECK(reply.verb == Verb::err);
    CHECK(reply.fields[0] == "UNVERIFIED");
  }

  SUBCASE("duplicate job id") {
    c.client.upload("ok.roc", to_bytes(R"({"tools":[]})"));
    c.client.exec("dup", "ok.roc", "src.png");
    const Frame reply = c.client.roundtrip_raw(
        make_frame(Verb::exec, c.client.session(), {"dup", "ok.roc", "src.png"}));
    CHECK(reply.verb == Verb::err);
    CHECK(reply.fields[0] == "DUPJOB");
    server.wait_idle();
  }

  SUBCASE("unknown job in STATUS") {
    const Frame reply = c.client.roundtrip_raw(
        make_frame(Verb::status, c.client.session(), {"ghost"}));
    CHECK(reply.verb == Verb::err);
    CHECK(reply.fields[0] == "NOJOB");
  }

  SUBCASE("parse failure surfaces as ERR EXEC") {
    c.client.exec("bad", "bad.roc", "src.png");
    const Client::Status final = c.client.wait("bad");
    CHECK(final.state == "ERROR");
    const Frame reply = c.client.roundtrip_raw(
        make_frame(Verb::result, c.client.session(), {"bad"}));
    CHECK(reply.verb == Verb::err);
    REQUIRE(reply.fields.size() >= 2);
    CHECK(reply.fields[0] == "EXEC");
    CHECK(reply.fields[1] == "PARSE");
  }
}

TEST_CASE("sessions are isolated") {
  Server server(test_config());
  Connection a(server);
  Connection b(server);
  a.client.hello("alpha");
  b.client.hello("beta");

  a.client.upload("shared.roc", to_bytes(R"({"tools":[]})"));
  b.client.upload("img.png", encode_png(oracles::test_card(8, 8)));

  // Session B cannot see session A's file.
  const Frame reply = b.client.roundtrip_raw(make_frame(
      Verb::exec, b.client.session(), {"j", "shared.roc", "img.png"}));
  CHECK(reply.verb == Verb::err);
  CHECK(reply.fields[0] == "UNVERIFIED");
}

TEST_CASE("status progression is monotone") {
  Server server(test_config());
  Connection c(server);
  c.client.hello("poller");

  const Image src = oracles::test_card(96, 96);
  RocDocument doc;
  for (const char* name : {"Exposure", "Contrast", "Saturation", "Vibrance"}) {
    ToolInvocation t;
    t.name = name;
    t.params["value"] = 0.25;
    doc.tools.push_back(t);
  }
  c.client.upload("edit.roc", to_bytes(serialize_roc(doc)));
  c.client.upload("src.png", encode_png(src));
  c.client.exec("watch", "edit.roc", "src.png");

  int last = -1;
  for (;;) {
    const Client::Status s = c.client.status("watch");
    CHECK(s.progress >= last);
    last = s.progress;
    if (s.state == "DONE" || s.state == "ERROR") break;
  }
  CHECK(c.client.status("watch").state == "DONE");
}

TEST_CASE("concurrent jobs all settle with the direct-render digest") {
  ServerConfig config = test_config();
  config.workers = 8;
  Server server(config);
  Connection c(server);
  c.client.hello("swarm");

  const auto catalog = oracles::shipped_catalog();
  const Image src = oracles::test_card(24, 24);
  c.client.upload("src.png", encode_png(src));

  constexpr int kJobs = 24;
  std::vector<std::string> digests(kJobs);
  for (int i = 0; i < kJobs; ++i) {
    RocDocument doc;
    ToolInvocation t;
    t.name = "Exposure";
    t.params["value"] = -1.0 + 2.0 * i / kJobs;
    doc.tools.push_back(t);
    const std::string roc = serialize_roc(doc);
    c.client.upload("e" + std::to_string(i) + ".roc", to_bytes(roc));
    digests[i] = sha256_hex(encode_png(apply_roc(src, parse_roc(roc, catalog))));
  }
  for (int i = 0; i < kJobs; ++i)
    c.client.exec("job" + std::to_string(i), "e" + std::to_string(i) + ".roc", "src.png");

  server.wait_idle();
  for (int i = 0; i < kJobs; ++i) {
    const Client::Status s = c.client.status("job" + std::to_string(i));
    CHECK(s.state == "DONE");
    const Client::Result r = c.client.result("job" + std::to_string(i));
    CHECK(r.digest == digests[i]);
  }
  c.client.bye();
}

TEST_CASE("tcp transport round trip") {
  Server server(test_config());
  TcpListener listener("127.0.0.1", 0);
  std::thread accept_thread([&] { serve_tcp(server, listener, 1); });

  auto transport = TcpTransport::connect("127.0.0.1", listener.port());
  Client client(*transport);
  client.hello("tcp-client");
  client.upload("doc.roc", to_bytes(R"({"tools":[]})"));
  client.upload("img.png", encode_png(oracles::test_card(8, 8)));
  client.exec("j", "doc.roc", "img.png");
  CHECK(client.wait("j").state == "DONE");
  client.bye();
  transport->close();
  accept_thread.join();
}
