#include "rdg/server/session_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>

#include "rdg/util/errors.hpp"
#include "rdg/util/text.hpp"

namespace rdg {

nlohmann::json LogHeader::to_json() const {
  return {{"header",
           {{"session", session},
            {"variant", to_string(variant)},
            {"map_version", map_version},
            {"seed", seed},
            {"participants", {{"director", director}, {"matcher", matcher}, {"matcher_kind", matcher_kind}}},
            {"repertoire_version", repertoire_version},
            {"time_limit_ms", time_limit_ms}}}};
}

LogHeader LogHeader::from_json(const nlohmann::json& j) {
  try {
    const auto& h = j.at("header");
    LogHeader out;
    out.session = h.at("session").get<std::string>();
    out.variant = variant_from_string(h.at("variant").get<std::string>());
    out.map_version = h.at("map_version").get<std::string>();
    out.seed = h.at("seed").get<std::uint64_t>();
    const auto& p = h.at("participants");
    out.director = p.at("director").get<std::string>();
    out.matcher = p.at("matcher").get<std::string>();
    out.matcher_kind = p.value("matcher_kind", "");
    out.repertoire_version = h.value("repertoire_version", "");
    out.time_limit_ms = h.value("time_limit_ms", kGameDurationMs);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ReplayError(std::string("bad log header: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ReplayError(std::string("bad log header: ") + e.what());
  }
}

nlohmann::json LogEvent::to_json() const {
  return {{"seq", seq}, {"session", session}, {"ts", ts}, {"kind", to_string(kind)},
          {"from", from}, {"to", to},           {"payload", payload}};
}

LogEvent LogEvent::from_json(const nlohmann::json& j) {
  try {
    LogEvent e;
    e.seq = j.at("seq").get<std::int64_t>();
    e.session = j.at("session").get<std::string>();
    e.ts = j.at("ts").get<Millis>();
    const auto k = j.at("kind").get<std::string>();
    auto kind = kind_from_string(k);
    if (!kind) throw ReplayError("unknown event kind '" + k + "'");
    e.kind = *kind;
    e.from = j.at("from").get<std::string>();
    e.to = j.at("to").get<std::vector<std::string>>();
    e.payload = j.at("payload");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ReplayError(std::string("bad log event: ") + ex.what());
  }
}

SessionLog SessionLog::parse(std::string_view text) {
  SessionLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ReplayError("log line " + std::to_string(line_no) + " is not JSON");
    if (!have_header) {
      log.header = LogHeader::from_json(j);
      have_header = true;
    } else {
      try {
        log.events.push_back(LogEvent::from_json(j));
      } catch (const ReplayError& e) {
        throw ReplayError("log line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (!have_header) throw ReplayError("log is empty");
  return log;
}

void MemoryLogStore::append(const std::string& session, const std::string& line) {
  std::lock_guard lock(mu_);
  auto& s = logs_[session];
  s += line;
  s += '\n';
}

std::string MemoryLogStore::read(const std::string& session) const {
  std::lock_guard lock(mu_);
  auto it = logs_.find(session);
  if (it == logs_.end()) throw NotFoundError("no log for session '" + session + "'");
  return it->second;
}

std::vector<std::string> MemoryLogStore::sessions() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, v] : logs_) out.push_back(k);
  return out;
}

bool MemoryLogStore::put_once(const std::string& name, const std::string& bytes) {
  std::lock_guard lock(mu_);
  return blobs_.emplace(name, bytes).second;
}

std::optional<std::string> MemoryLogStore::get(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = blobs_.find(name);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

namespace {

void check_name(const std::string& name) {
  const bool ok = !name.empty() && name.front() != '.' && std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
  if (!ok) throw ArgumentError("invalid log name '" + name + "'");
}

void write_all(int fd, const std::string& bytes, const std::string& what) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      ::close(fd);
      throw StorageError("write failed for " + what);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd) != 0) {
    ::close(fd);
    throw StorageError("sync failed for " + what);
  }
  ::close(fd);
}

}  // namespace

DirLogStore::DirLogStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageError("cannot create log directory " + dir_.string() + ": " + ec.message());
}

void DirLogStore::append(const std::string& session, const std::string& line) {
  check_name(session);
  std::lock_guard lock(mu_);
  const auto path = dir_ / (session + ".jsonl");
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot open " + path.string());
  write_all(fd, line + "\n", path.string());
}

std::string DirLogStore::read(const std::string& session) const {
  check_name(session);
  const auto path = dir_ / (session + ".jsonl");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw NotFoundError("no log for session '" + session + "'");
  return read_file(path);
}

std::vector<std::string> DirLogStore::sessions() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir_, ec)) {
    if (e.path().extension() == ".jsonl") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool DirLogStore::put_once(const std::string& name, const std::string& bytes) {
  check_name(name);
  std::lock_guard lock(mu_);
  const auto path = dir_ / name;
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) {
    if (errno == EEXIST) return false;
    throw StorageError("cannot create " + path.string());
  }
  write_all(fd, bytes, path.string());
  return true;
}

std::optional<std::string> DirLogStore::get(const std::string& name) const {
  check_name(name);
  const auto path = dir_ / name;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  return read_file(path);
}

}  // namespace rdg
