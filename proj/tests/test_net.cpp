#include <doctest.h>

#include <fstream>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "rdg/net/http_server.hpp"
#include "support.hpp"

using namespace rdg;
using nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
using tcp = asio::ip::tcp;

namespace {

struct Fixture {
  rdg::test::TempDir statics;
  MemoryLogStore logs;
  InMemoryStore memory;
  SessionServer server;
  HttpServer http_server;

  static ServerConfig server_cfg() {
    ServerConfig c;
    c.autonomous_pool = 1;
    return c;
  }

  static HttpConfig cfg(const std::filesystem::path& dir) {
    HttpConfig c;
    c.port = 0;
    c.map_file = rdg::test::data_file("world.geojson");
    c.repertoire_file = rdg::test::data_file("repertoire.json");
    c.static_dir = dir;
    c.tick_ms = 20;
    return c;
  }

  Fixture()
      : server(rdg::test::world(), rdg::test::repertoire(), logs, &memory, server_cfg()),
        http_server(server, cfg(statics.path)) {
    std::ofstream(statics.path / "app.js") << "console.log(1);";
    http_server.start();
  }
  ~Fixture() { http_server.stop(); }

  http::response<http::string_body> request(http::verb verb, const std::string& target, const std::string& body = {}) {
    asio::io_context io;
    tcp::socket sock(io);
    sock.connect({asio::ip::make_address("127.0.0.1"), http_server.port()});
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "localhost");
    if (!body.empty()) {
      req.set(http::field::content_type, "application/json");
      req.body() = body;
      req.prepare_payload();
    }
    http::write(sock, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(sock, buf, res);
    return res;
  }
};

struct WsClient {
  asio::io_context io;
  beast::websocket::stream<tcp::socket> ws{io};
  std::int64_t seq = 0;

  WsClient(std::uint16_t port, const std::string& path) {
    ws.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
    ws.handshake("localhost", path);
  }
  void send(std::string_view kind, json payload) {
    ws.write(asio::buffer(json{{"seq", ++seq}, {"kind", kind}, {"payload", payload}}.dump()));
  }
  json recv() {
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
  // Reads until a frame of `kind` arrives.
  json recv_kind(std::string_view kind) {
    for (int i = 0; i < 200; ++i) {
      auto m = recv();
      if (m["kind"] == kind) return m;
    }
    FAIL("no " << kind << " frame");
    return {};
  }
};

}  // namespace

TEST_CASE("HTTP routes") {
  Fixture f;
  CHECK(f.http_server.port() != 0);

  auto map = f.request(http::verb::get, "/api/map");
  CHECK(map.result() == http::status::ok);
  CHECK(json::parse(map.body())["type"] == "FeatureCollection");

  auto rep = f.request(http::verb::get, "/api/repertoire");
  CHECK(rep.result() == http::status::ok);
  CHECK(json::parse(rep.body())["buttons"].size() == 30);

  CHECK(f.request(http::verb::get, "/").body().find("Director") != std::string::npos);
  CHECK(f.request(http::verb::get, "/app.js").body() == "console.log(1);");
  CHECK(f.request(http::verb::get, "/nope").result() == http::status::not_found);
  CHECK(f.request(http::verb::get, "/../etc/passwd").result() == http::status::not_found);
  CHECK(f.request(http::verb::get, "/api/replay/none").result() == http::status::not_found);

  auto bad = f.request(http::verb::post, "/api/join", R"({"role":"spectator","variant":"WEB"})");
  CHECK(bad.result() == http::status::bad_request);
  CHECK(f.request(http::verb::post, "/api/questionnaire", R"({"token":"x","answers":{"a":1}})").result() ==
        http::status::unauthorized);

  auto join = f.request(http::verb::post, "/api/join", R"({"role":"director","variant":"WEB"})");
  REQUIRE(join.result() == http::status::ok);
  auto j = json::parse(join.body());
  CHECK(j["token"].get<std::string>().size() == 32);

  auto sessions = json::parse(f.request(http::verb::get, "/api/sessions").body());
  REQUIRE(sessions.size() == 1);
  CHECK(sessions[0]["matcher_kind"] == "autonomous");
}

TEST_CASE("websocket queue and play") {
  Fixture f;
  WsClient q(f.http_server.port(), "/queue");
  q.send("JOIN", {{"role", "director"}, {"variant", "EMBODIED"}});
  auto joined = q.recv_kind("JOIN");
  const auto token = joined["payload"]["token"].get<std::string>();
  CHECK(q.recv_kind("QUEUE_POS")["payload"]["position"] == 1);
  auto paired = q.recv_kind("PAIRED");
  CHECK(paired["payload"]["role"] == "director");

  WsClient p(f.http_server.port(), "/play");
  p.send("JOIN", {{"token", token}});
  CHECK(p.recv_kind("JOIN")["payload"]["role"] == "director");
  auto target = p.recv_kind("TARGET")["payload"]["country"].get<std::string>();
  CHECK(rdg::test::world().contains(target));

  p.send("CHAT", {{"text", "It's Canada"}});
  auto shown = p.recv_kind("SELECTION_SHOWN");
  CHECK(shown["payload"]["country"] == "CAN");

  p.send("SELECT", {{"country", "FRA"}});
  CHECK(p.recv_kind("ERROR")["payload"]["code"] == "role");
  p.ws.close(beast::websocket::close_code::normal);
}
