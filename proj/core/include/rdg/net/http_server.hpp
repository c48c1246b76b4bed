#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "rdg/server/session_server.hpp"

namespace rdg {

struct HttpConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::filesystem::path map_file;
  std::filesystem::path repertoire_file;
  std::filesystem::path static_dir;  // optional built web-ui; empty serves the rules page only
  Millis tick_ms = 100;              // timer resolution
};

/// HTTP and websocket front end for a SessionServer.
///
/// Websockets: /play, /wizard, /queue. HTTP: GET /, /api/map,
/// /api/repertoire, /api/sessions, /api/replay/<id>; POST /api/join,
/// /api/questionnaire. Everything runs on one io thread.
class HttpServer {
 public:
  HttpServer(SessionServer& server, HttpConfig config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Bound port, valid after construction.
  std::uint16_t port() const;
  /// Runs the io loop on the calling thread until stop().
  void run();
  /// Runs the io loop on a background thread.
  void start();
  /// Thread-safe; joins the background thread if any.
  void stop();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace rdg
