#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdg {

using CountryId = std::string;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

struct BBox {
  double min_lon = 0.0, min_lat = 0.0, max_lon = 0.0, max_lat = 0.0;

  bool contains(LonLat p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
  }
  double diagonal() const;
};

struct Polygon {
  std::vector<LonLat> outer;
  std::vector<std::vector<LonLat>> holes;
};

enum class Direction { north, south, east, west };
enum class Side { east, west };

std::string_view to_string(Direction d);
std::string_view to_string(Side s);

struct Country {
  CountryId id;
  std::string name;
  std::vector<std::string> aliases;
  std::string region;     // subregion tag, e.g. "Northern Africa"
  std::string continent;  // coarse tag, e.g. "Africa"; empty if absent
  double area_km2 = 0.0;
  LonLat centroid;
  std::vector<Polygon> geometry;
  BBox bbox;
  bool selectable = true;
};

/// Where a point lies relative to a country's geometry.
enum class Containment { outside, boundary, inside };

/// Immutable country dataset: geometry, regions and the land-border graph.
/// Safe to share between threads once loaded.
class WorldMap {
 public:
  /// Parses the map interchange file (a GeoJSON FeatureCollection).
  /// Throws LoadError naming the offending country on any invariant breach.
  static WorldMap from_geojson(std::string_view bytes);
  static WorldMap load(const std::filesystem::path& path);

  const std::string& version() const { return version_; }
  std::size_t size() const { return countries_.size(); }

  bool contains(std::string_view id) const;
  const Country& country(std::string_view id) const;
  const Country* find(std::string_view id) const;
  const std::map<CountryId, Country, std::less<>>& countries() const { return countries_; }

  /// Sorted ids of countries that may be drawn as targets.
  const std::vector<CountryId>& selectable() const { return selectable_; }

  /// Exact case-folded lookup over names and aliases.
  std::optional<CountryId> lookup_name(std::string_view name) const;

  const std::set<CountryId>& neighbors(std::string_view id) const;

  bool has_region(std::string_view tag) const;
  /// Sorted member ids of a region (subregion or continent tag).
  const std::vector<CountryId>& region_members(std::string_view tag) const;
  std::vector<std::string> region_tags() const;

  /// Region members by area descending, ties by id ascending, at most n.
  std::vector<CountryId> largest_in_region(std::string_view region, int n) const;
  /// Same ordering over an arbitrary candidate set.
  std::vector<CountryId> largest_of(std::span<const CountryId> candidates, int n) const;

  /// Neighbor whose centroid bearing is closest to `dir`, if the deviation is
  /// under 60 degrees.
  std::optional<CountryId> step_in_direction(std::string_view from, Direction dir) const;

  CountryId extremal_by_longitude(std::span<const CountryId> candidates, Side side) const;

  std::optional<CountryId> hit_test(LonLat point) const;
  Containment locate(const Country& c, LonLat point) const;

  /// Compass bearing in degrees [0, 360) from a's centroid to b's on the
  /// equirectangular plane, longitude difference wrapped into [-180, 180].
  double bearing(std::string_view from, std::string_view to) const;

  static constexpr double kStepToleranceDeg = 60.0;

 private:
  std::map<CountryId, Country, std::less<>> countries_;
  std::map<CountryId, std::set<CountryId>, std::less<>> adjacency_;
  std::map<std::string, std::vector<CountryId>, std::less<>> regions_;
  std::map<std::string, CountryId, std::less<>> names_;  // normalized -> id
  std::vector<CountryId> selectable_;
  std::string version_;
};

}  // namespace rdg
