#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdg/server/wire.hpp"

namespace rdg {

struct LogHeader {
  std::string session;
  Variant variant = Variant::web;
  std::string map_version;
  std::uint64_t seed = 0;
  ParticipantId director;
  ParticipantId matcher;
  std::string matcher_kind;  // human | wizard | autonomous
  std::string repertoire_version;
  Millis time_limit_ms = kGameDurationMs;

  nlohmann::json to_json() const;
  static LogHeader from_json(const nlohmann::json& j);  // throws ReplayError
};

/// One accepted or server-generated session event.
struct LogEvent {
  std::int64_t seq = 0;  // log order, 1-based, contiguous
  std::string session;
  Millis ts = 0;
  MsgKind kind = MsgKind::ERROR;
  std::string from;             // participant id, or "server"
  std::vector<std::string> to;  // recipient roles
  nlohmann::json payload = nlohmann::json::object();

  nlohmann::json to_json() const;
  static LogEvent from_json(const nlohmann::json& j);  // throws ReplayError
};

/// Header line followed by one event per line.
struct SessionLog {
  LogHeader header;
  std::vector<LogEvent> events;

  /// Throws ReplayError naming the bad line.
  static SessionLog parse(std::string_view text);
};

/// Where session logs and questionnaires live. Appends are durable when
/// append() returns.
class LogStore {
 public:
  virtual ~LogStore() = default;
  virtual void append(const std::string& session, const std::string& line) = 0;
  /// Throws NotFoundError.
  virtual std::string read(const std::string& session) const = 0;
  virtual std::vector<std::string> sessions() const = 0;
  /// Stores a named blob once. Returns false if it already exists.
  virtual bool put_once(const std::string& name, const std::string& bytes) = 0;
  virtual std::optional<std::string> get(const std::string& name) const = 0;
};

class MemoryLogStore final : public LogStore {
 public:
  void append(const std::string& session, const std::string& line) override;
  std::string read(const std::string& session) const override;
  std::vector<std::string> sessions() const override;
  bool put_once(const std::string& name, const std::string& bytes) override;
  std::optional<std::string> get(const std::string& name) const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> logs_;
  std::map<std::string, std::string> blobs_;
};

/// <dir>/<session>.jsonl plus <dir>/<name> blobs. Each append is flushed.
class DirLogStore final : public LogStore {
 public:
  explicit DirLogStore(std::filesystem::path dir);
  void append(const std::string& session, const std::string& line) override;
  std::string read(const std::string& session) const override;
  std::vector<std::string> sessions() const override;
  bool put_once(const std::string& name, const std::string& bytes) override;
  std::optional<std::string> get(const std::string& name) const override;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

}  // namespace rdg
