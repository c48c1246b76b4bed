#include "rdg/net/http_server.hpp"

#include <chrono>
#include <deque>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "rdg/util/errors.hpp"
#include "rdg/util/text.hpp"

namespace rdg {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

constexpr std::string_view kRulesPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>Reference game</title></head>
<body>
<h1>Find the country</h1>
<p>Two players share a world map. The Director sees a highlighted target country and describes it in chat.
The Matcher clicks the country they think is meant. You have ten minutes.</p>
<p>Online version: the Director presses <em>next</em> when ready; a correct selection scores one point.
Embodied version: the Matcher has two guesses; right first time scores two points, right second time one.</p>
<p>Clients connect by websocket to <code>/queue</code>, then <code>/play</code>; wizards use <code>/wizard</code>.</p>
</body></html>
)";

std::string_view mime_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".geojson") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

http::status status_for(const Error& e) {
  const std::string code = e.code();
  if (code == "not_found") return http::status::not_found;
  if (code == "auth") return http::status::unauthorized;
  if (code == "state") return http::status::conflict;
  return http::status::bad_request;
}

}  // namespace

struct HttpServer::Impl : std::enable_shared_from_this<HttpServer::Impl> {
  SessionServer& server;
  HttpConfig config;
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  asio::steady_timer ticker{io};
  std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now();
  std::string map_bytes;
  std::string repertoire_bytes;
  std::thread thread;
  bool stopped = false;

  Impl(SessionServer& s, HttpConfig c) : server(s), config(std::move(c)) {
    map_bytes = config.map_file.empty() ? std::string() : read_file(config.map_file);
    repertoire_bytes = config.repertoire_file.empty() ? server.repertoire().source() : read_file(config.repertoire_file);
    tcp::endpoint ep(asio::ip::make_address(config.address), config.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  Millis now() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - epoch).count();
  }

  void begin() {
    accept();
    tick();
  }

  void accept() {
    acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      std::make_shared<HttpSession>(self, std::move(sock))->run();
      self->accept();
    });
  }

  void tick() {
    ticker.expires_after(std::chrono::milliseconds(config.tick_ms));
    ticker.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      try {
        self->server.advance(self->now());
      } catch (const std::exception& e) {
        spdlog::error("timer: {}", e.what());
      }
      self->tick();
    });
  }

  // ---- websocket ----------------------------------------------------------

  struct WsSession : std::enable_shared_from_this<WsSession> {
    std::shared_ptr<Impl> owner;
    websocket::stream<beast::tcp_stream> ws;
    Endpoint endpoint;
    std::optional<ConnId> conn;
    beast::flat_buffer buffer;
    std::deque<std::string> outbox;
    bool closing = false;

    WsSession(std::shared_ptr<Impl> o, tcp::socket s, Endpoint e)
        : owner(std::move(o)), ws(std::move(s)), endpoint(e) {}

    void accept(http::request<http::string_body> req) {
      ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsSession> weak = self;
        // Called under the server lock: only queue work on the io thread.
        Transport t{[weak](const std::string& text) {
                      if (auto s = weak.lock()) asio::post(s->ws.get_executor(), [s, text] { s->write(text); });
                    },
                    [weak] {
                      if (auto s = weak.lock()) asio::post(s->ws.get_executor(), [s] { s->close(); });
                    }};
        self->conn = self->owner->server.connect(self->endpoint, std::move(t), self->owner->now());
        self->read();
      });
    }

    void read() {
      ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->gone();
        auto text = beast::buffers_to_string(self->buffer.data());
        self->buffer.consume(self->buffer.size());
        try {
          self->owner->server.receive(*self->conn, text, self->owner->now());
        } catch (const std::exception& e) {
          spdlog::error("receive: {}", e.what());
        }
        if (!self->closing) self->read();
      });
    }

    void write(std::string text) {
      if (closing) return;
      outbox.push_back(std::move(text));
      if (outbox.size() == 1) flush();
    }

    void flush() {
      ws.text(true);
      ws.async_write(asio::buffer(outbox.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->gone();
        self->outbox.pop_front();
        if (!self->outbox.empty()) self->flush();
      });
    }

    void close() {
      if (closing) return;
      closing = true;
      ws.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) { self->gone(); });
    }

    void gone() {
      if (!conn) return;
      const auto id = *conn;
      conn.reset();
      closing = true;
      try {
        owner->server.disconnect(id, owner->now());
      } catch (const std::exception& e) {
        spdlog::error("disconnect: {}", e.what());
      }
    }
  };

  // ---- plain HTTP ---------------------------------------------------------

  struct HttpSession : std::enable_shared_from_this<HttpSession> {
    std::shared_ptr<Impl> owner;
    beast::tcp_stream stream;
    beast::flat_buffer buffer;
    http::request<http::string_body> req;

    HttpSession(std::shared_ptr<Impl> o, tcp::socket s) : owner(std::move(o)), stream(std::move(s)) {}

    void run() {
      req = {};
      stream.expires_after(std::chrono::seconds(30));
      http::async_read(stream, buffer, req, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return;
        self->dispatch();
      });
    }

    void dispatch() {
      const std::string target(req.target());
      if (websocket::is_upgrade(req)) {
        std::optional<Endpoint> ep;
        if (target == "/play") ep = Endpoint::play;
        if (target == "/wizard") ep = Endpoint::wizard;
        if (target == "/queue") ep = Endpoint::queue;
        if (ep) {
          stream.expires_never();
          std::make_shared<WsSession>(owner, stream.release_socket(), *ep)->accept(std::move(req));
          return;
        }
      }
      reply(owner->route(req));
    }

    void reply(http::response<http::string_body> res) {
      res.keep_alive(req.keep_alive());
      res.prepare_payload();
      auto sp = std::make_shared<http::response<http::string_body>>(std::move(res));
      http::async_write(stream, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
        if (ec) return;
        if (sp->keep_alive()) return self->run();
        beast::error_code ignored;
        self->stream.socket().shutdown(tcp::socket::shutdown_send, ignored);
      });
    }
  };

  http::response<http::string_body> respond(const http::request<http::string_body>& req, http::status st,
                                            std::string body, std::string_view type) {
    http::response<http::string_body> res{st, req.version()};
    res.set(http::field::server, "rdgmap");
    res.set(http::field::content_type, std::string(type));
    res.body() = std::move(body);
    return res;
  }

  http::response<http::string_body> json_reply(const http::request<http::string_body>& req, const json& j,
                                               http::status st = http::status::ok) {
    return respond(req, st, j.dump(), "application/json");
  }

  http::response<http::string_body> route(const http::request<http::string_body>& req) {
    const std::string target(req.target());
    const auto path = target.substr(0, target.find('?'));
    try {
      if (req.method() == http::verb::get) {
        if (path == "/api/map") {
          if (map_bytes.empty()) throw NotFoundError("no map file configured");
          return respond(req, http::status::ok, map_bytes, "application/geo+json");
        }
        if (path == "/api/repertoire") return respond(req, http::status::ok, repertoire_bytes, "application/json");
        if (path == "/api/sessions") {
          json rows = json::array();
          for (const auto& s : server.sessions())
            rows.push_back({{"session", s.id},
                            {"variant", to_string(s.variant)},
                            {"phase", to_string(s.phase)},
                            {"matcher_kind", to_string(s.matcher_kind)},
                            {"score", s.score},
                            {"resolved", s.resolved},
                            {"ended", s.ended}});
          return json_reply(req, rows);
        }
        constexpr std::string_view kReplay = "/api/replay/";
        if (path.starts_with(kReplay)) return json_reply(req, server.replay_summary(path.substr(kReplay.size())));
        if (auto file = static_file(path)) return respond(req, http::status::ok, read_file(*file), mime_for(*file));
        if (path == "/" || path == "/rules") return respond(req, http::status::ok, std::string(kRulesPage), "text/html; charset=utf-8");
        throw NotFoundError("no route for " + path);
      }
      if (req.method() == http::verb::post) {
        const json body = json::parse(req.body());
        if (path == "/api/join") {
          std::optional<ParticipantId> pid;
          if (body.contains("participant")) pid = body.at("participant").get<std::string>();
          auto r = server.join(body.at("role").get<std::string>(),
                               variant_from_string(body.at("variant").get<std::string>()), pid, now());
          return json_reply(req, {{"participant", r.participant}, {"token", r.token}, {"position", r.position}});
        }
        if (path == "/api/questionnaire") {
          server.submit_questionnaire(body.at("token").get<std::string>(), body.at("answers"));
          return json_reply(req, {{"stored", true}});
        }
        throw NotFoundError("no route for " + path);
      }
      return json_reply(req, {{"code", "method"}, {"message", "method not allowed"}},
                        http::status::method_not_allowed);
    } catch (const Error& e) {
      return json_reply(req, {{"code", e.code()}, {"message", e.what()}}, status_for(e));
    } catch (const json::exception& e) {
      return json_reply(req, {{"code", "validation"}, {"message", e.what()}}, http::status::bad_request);
    }
  }

  // Files under static_dir, never escaping it.
  std::optional<std::filesystem::path> static_file(const std::string& path) const {
    if (config.static_dir.empty() || path.find("..") != std::string::npos) return std::nullopt;
    auto rel = path == "/" ? std::string("index.html") : path.substr(1);
    auto p = config.static_dir / rel;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) return std::nullopt;
    return p;
  }
};

HttpServer::HttpServer(SessionServer& server, HttpConfig config)
    : impl_(std::make_shared<Impl>(server, std::move(config))) {
  impl_->begin();
}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::run() { impl_->io.run(); }

void HttpServer::start() {
  impl_->thread = std::thread([impl = impl_] { impl->io.run(); });
}

void HttpServer::stop() {
  if (impl_->stopped) return;
  impl_->stopped = true;
  asio::post(impl_->io, [impl = impl_] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    impl->ticker.cancel();
    impl->io.stop();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rdg
