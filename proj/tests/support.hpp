#pragma once

#include <filesystem>
#include <string_view>

#include <unistd.h>

#include "rdg/agent/repertoire.hpp"
#include "rdg/world/world_map.hpp"

namespace rdg::test {

inline std::filesystem::path data_file(std::string_view name) { return std::filesystem::path(RDG_DATA_DIR) / name; }
inline std::filesystem::path fixture(std::string_view name) { return std::filesystem::path(RDG_TEST_DATA_DIR) / name; }

inline const WorldMap& world() {
  static const WorldMap m = WorldMap::load(data_file("world.geojson"));
  return m;
}

inline const WorldMap& toy() {
  static const WorldMap m = WorldMap::load(fixture("toy5.geojson"));
  return m;
}

inline const Repertoire& repertoire() {
  static const Repertoire r = Repertoire::load(data_file("repertoire.json"));
  return r;
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int n = 0;
    path = std::filesystem::temp_directory_path() /
           ("rdg-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace rdg::test
