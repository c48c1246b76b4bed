#include <fstream>

#include <nlohmann/json.hpp>

#include "rdg/agent/knowledge.hpp"
#include "rdg/util/errors.hpp"
#include "rdg/util/text.hpp"

namespace rdg {

std::set<CountryId> InMemoryStore::recall(const ParticipantId& director) {
  std::lock_guard lock(mu_);
  auto it = data_.find(director);
  return it == data_.end() ? std::set<CountryId>{} : it->second;
}

void InMemoryStore::remember(const ParticipantId& director, const std::set<CountryId>& learned) {
  std::lock_guard lock(mu_);
  data_[director].insert(learned.begin(), learned.end());
}

std::map<ParticipantId, std::set<CountryId>> FileMemoryStore::read_all() {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return {};
  const auto bytes = read_file(path_);
  try {
    return nlohmann::json::parse(bytes).get<std::map<ParticipantId, std::set<CountryId>>>();
  } catch (const nlohmann::json::exception& e) {
    throw StorageError("memory store " + path_.string() + " is corrupt: " + e.what());
  }
}

std::set<CountryId> FileMemoryStore::recall(const ParticipantId& director) {
  std::lock_guard lock(mu_);
  auto all = read_all();
  auto it = all.find(director);
  return it == all.end() ? std::set<CountryId>{} : it->second;
}

void FileMemoryStore::remember(const ParticipantId& director, const std::set<CountryId>& learned) {
  std::lock_guard lock(mu_);
  auto all = read_all();
  all[director].insert(learned.begin(), learned.end());
  auto tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out << nlohmann::json(all).dump(2) << '\n';
    if (!out) throw StorageError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw StorageError("cannot replace " + path_.string() + ": " + ec.message());
}

}  // namespace rdg
