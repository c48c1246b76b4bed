#include "rdg/world/world_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "rdg/util/errors.hpp"
#include "rdg/util/sha256.hpp"
#include "rdg/util/text.hpp"

namespace rdg {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEdgeEps = 1e-9;

std::vector<LonLat> parse_ring(const json& ring, const std::string& id) {
  if (!ring.is_array() || ring.size() < 3) throw LoadError("country " + id + ": degenerate ring");
  std::vector<LonLat> out;
  out.reserve(ring.size());
  for (const auto& pt : ring) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw LoadError("country " + id + ": malformed coordinate");
    }
    out.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (out.front().lon == out.back().lon && out.front().lat == out.back().lat) out.pop_back();
  if (out.size() < 3) throw LoadError("country " + id + ": degenerate ring");
  return out;
}

Polygon parse_polygon(const json& rings, const std::string& id) {
  if (!rings.is_array() || rings.empty()) throw LoadError("country " + id + ": empty polygon");
  Polygon p;
  p.outer = parse_ring(rings[0], id);
  for (std::size_t i = 1; i < rings.size(); ++i) p.holes.push_back(parse_ring(rings[i], id));
  return p;
}

std::vector<Polygon> parse_geometry(const json& feature, const std::string& id) {
  const auto it = feature.find("geometry");
  if (it == feature.end() || !it->is_object()) throw LoadError("country " + id + ": missing geometry");
  const auto& geom = *it;
  const std::string type = geom.value("type", "");
  const auto& coords = geom.at("coordinates");
  std::vector<Polygon> out;
  if (type == "Polygon") {
    out.push_back(parse_polygon(coords, id));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : coords) out.push_back(parse_polygon(poly, id));
  } else {
    throw LoadError("country " + id + ": unsupported geometry type '" + type + "'");
  }
  if (out.empty()) throw LoadError("country " + id + ": missing geometry");
  return out;
}

double ring_signed_area(const std::vector<LonLat>& r) {
  double s = 0.0;
  for (std::size_t i = 0, n = r.size(); i < n; ++i) {
    const auto& a = r[i];
    const auto& b = r[(i + 1) % n];
    s += a.lon * b.lat - b.lon * a.lat;
  }
  return s / 2.0;
}

LonLat ring_centroid(const std::vector<LonLat>& r) {
  const double a = ring_signed_area(r);
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, n = r.size(); i < n; ++i) {
    const auto& p = r[i];
    const auto& q = r[(i + 1) % n];
    const double f = p.lon * q.lat - q.lon * p.lat;
    cx += (p.lon + q.lon) * f;
    cy += (p.lat + q.lat) * f;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

bool on_segment(LonLat p, LonLat a, LonLat b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (std::abs(cross) > kEdgeEps) return false;
  return p.lon >= std::min(a.lon, b.lon) - kEdgeEps && p.lon <= std::max(a.lon, b.lon) + kEdgeEps &&
         p.lat >= std::min(a.lat, b.lat) - kEdgeEps && p.lat <= std::max(a.lat, b.lat) + kEdgeEps;
}

// 0 outside, 1 boundary, 2 inside
int ring_locate(const std::vector<LonLat>& r, LonLat p) {
  bool inside = false;
  for (std::size_t i = 0, n = r.size(); i < n; ++i) {
    const LonLat a = r[i];
    const LonLat b = r[(i + 1) % n];
    if (on_segment(p, a, b)) return 1;
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside ? 2 : 0;
}

double distance_to_box(LonLat p, const BBox& b) {
  const double dx = std::max({b.min_lon - p.lon, 0.0, p.lon - b.max_lon});
  const double dy = std::max({b.min_lat - p.lat, 0.0, p.lat - b.max_lat});
  return std::hypot(dx, dy);
}

double compass(Direction d) {
  switch (d) {
    case Direction::north: return 0.0;
    case Direction::east: return 90.0;
    case Direction::south: return 180.0;
    case Direction::west: return 270.0;
  }
  return 0.0;
}

double angular_deviation(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace

double BBox::diagonal() const { return std::hypot(max_lon - min_lon, max_lat - min_lat); }

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::north: return "north";
    case Direction::south: return "south";
    case Direction::east: return "east";
    case Direction::west: return "west";
  }
  return "?";
}

std::string_view to_string(Side s) { return s == Side::east ? "east" : "west"; }

WorldMap WorldMap::load(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const StorageError& e) {
    throw LoadError(e.what());
  }
  return from_geojson(bytes);
}

WorldMap WorldMap::from_geojson(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("map file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw LoadError("map file is not a GeoJSON FeatureCollection");
  }

  WorldMap map;
  map.version_ = sha256_hex(bytes);
  std::map<CountryId, std::vector<CountryId>> declared;

  for (const auto& f : doc["features"]) {
    const json props = f.value("properties", json::object());
    const std::string id = props.value("id", "");
    if (id.empty()) throw LoadError("feature without properties.id");
    if (map.countries_.count(id)) throw LoadError("duplicate country id " + id);

    Country c;
    c.id = id;
    c.name = props.value("name", "");
    if (c.name.empty()) throw LoadError("country " + id + ": missing name");
    if (!props.contains("area_km2") || !props["area_km2"].is_number()) {
      throw LoadError("country " + id + ": missing area_km2");
    }
    c.area_km2 = props["area_km2"].get<double>();
    if (!(c.area_km2 > 0.0)) throw LoadError("country " + id + ": area must be positive");
    c.region = props.value("region", "");
    if (c.region.empty()) throw LoadError("country " + id + ": missing region");
    c.continent = props.value("continent", "");
    c.selectable = props.value("selectable", true);
    for (const auto& a : props.value("aliases", json::array())) {
      const auto alias = a.get<std::string>();
      if (normalize_phrase(alias).empty()) throw LoadError("country " + id + ": empty alias");
      c.aliases.push_back(alias);
    }
    c.geometry = parse_geometry(f, id);

    c.bbox = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
              std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    const Polygon* largest = nullptr;
    double largest_area = -1.0;
    for (const auto& poly : c.geometry) {
      for (const auto& p : poly.outer) {
        c.bbox.min_lon = std::min(c.bbox.min_lon, p.lon);
        c.bbox.max_lon = std::max(c.bbox.max_lon, p.lon);
        c.bbox.min_lat = std::min(c.bbox.min_lat, p.lat);
        c.bbox.max_lat = std::max(c.bbox.max_lat, p.lat);
      }
      const double a = std::abs(ring_signed_area(poly.outer));
      if (a > largest_area) {
        largest_area = a;
        largest = &poly;
      }
    }
    if (props.contains("centroid")) {
      const auto& ct = props["centroid"];
      c.centroid = {ct.at(0).get<double>(), ct.at(1).get<double>()};
    } else {
      c.centroid = ring_centroid(largest->outer);
    }
    if (c.centroid.lon < -180.0 || c.centroid.lon > 180.0 || c.centroid.lat < -90.0 || c.centroid.lat > 90.0) {
      throw LoadError("country " + id + ": centroid out of range");
    }
    if (distance_to_box(c.centroid, c.bbox) > c.bbox.diagonal()) {
      throw LoadError("country " + id + ": centroid too far from geometry");
    }

    auto& nb = declared[id];
    for (const auto& n : props.value("neighbors", json::array())) nb.push_back(n.get<std::string>());

    map.countries_.emplace(id, std::move(c));
  }

  for (const auto& [id, nbs] : declared) {
    auto& set = map.adjacency_[id];
    for (const auto& n : nbs) {
      if (n == id) throw LoadError("country " + id + ": self-loop in neighbors");
      if (!map.countries_.count(n)) throw LoadError("country " + id + ": unknown neighbor " + n);
      set.insert(n);
    }
  }
  for (const auto& [id, set] : map.adjacency_) {
    for (const auto& n : set) {
      if (!map.adjacency_[n].count(id)) throw LoadError("asymmetric adjacency " + id + "/" + n);
    }
  }

  for (const auto& [id, c] : map.countries_) {
    map.regions_[c.region].push_back(id);
    if (!c.continent.empty() && c.continent != c.region) map.regions_[c.continent].push_back(id);
    if (c.selectable) map.selectable_.push_back(id);

    auto add_name = [&](const std::string& n) {
      const auto key = normalize_phrase(n);
      auto [it, inserted] = map.names_.emplace(key, id);
      if (!inserted && it->second != id) {
        throw LoadError("name '" + n + "' maps to both " + it->second + " and " + id);
      }
    };
    add_name(c.name);
    for (const auto& a : c.aliases) add_name(a);
  }
  return map;
}

bool WorldMap::contains(std::string_view id) const { return countries_.find(id) != countries_.end(); }

const Country* WorldMap::find(std::string_view id) const {
  const auto it = countries_.find(id);
  return it == countries_.end() ? nullptr : &it->second;
}

const Country& WorldMap::country(std::string_view id) const {
  const auto* c = find(id);
  if (!c) throw NotFoundError("unknown country '" + std::string(id) + "'");
  return *c;
}

std::optional<CountryId> WorldMap::lookup_name(std::string_view name) const {
  const auto it = names_.find(normalize_phrase(name));
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

const std::set<CountryId>& WorldMap::neighbors(std::string_view id) const {
  const auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw NotFoundError("unknown country '" + std::string(id) + "'");
  return it->second;
}

bool WorldMap::has_region(std::string_view tag) const { return regions_.find(tag) != regions_.end(); }

const std::vector<CountryId>& WorldMap::region_members(std::string_view tag) const {
  const auto it = regions_.find(tag);
  if (it == regions_.end()) throw NotFoundError("unknown region '" + std::string(tag) + "'");
  return it->second;
}

std::vector<std::string> WorldMap::region_tags() const {
  std::vector<std::string> out;
  for (const auto& [tag, _] : regions_) out.push_back(tag);
  return out;
}

std::vector<CountryId> WorldMap::largest_of(std::span<const CountryId> candidates, int n) const {
  if (n < 1) throw ArgumentError("n must be >= 1");
  std::vector<CountryId> out(candidates.begin(), candidates.end());
  std::sort(out.begin(), out.end(), [this](const CountryId& a, const CountryId& b) {
    const double aa = country(a).area_km2, ab = country(b).area_km2;
    if (aa != ab) return aa > ab;
    return a < b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.size() > static_cast<std::size_t>(n)) out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<CountryId> WorldMap::largest_in_region(std::string_view region, int n) const {
  return largest_of(region_members(region), n);
}

double WorldMap::bearing(std::string_view from, std::string_view to) const {
  const auto& a = country(from).centroid;
  const auto& b = country(to).centroid;
  double dlon = b.lon - a.lon;
  dlon = std::fmod(dlon + 540.0, 360.0) - 180.0;
  const double deg = std::atan2(dlon, b.lat - a.lat) * 180.0 / kPi;
  return deg < 0.0 ? deg + 360.0 : deg;
}

std::optional<CountryId> WorldMap::step_in_direction(std::string_view from, Direction dir) const {
  const auto& nbs = neighbors(from);
  std::optional<CountryId> best;
  double best_dev = kStepToleranceDeg;
  for (const auto& n : nbs) {  // ascending id, so strict < keeps the smaller id on ties
    const double dev = angular_deviation(bearing(from, n), compass(dir));
    if (dev < best_dev) {
      best_dev = dev;
      best = n;
    }
  }
  return best;
}

CountryId WorldMap::extremal_by_longitude(std::span<const CountryId> candidates, Side side) const {
  if (candidates.empty()) throw ArgumentError("extremal_by_longitude: empty candidate set");
  const CountryId* best = nullptr;
  for (const auto& id : candidates) {
    const double lon = country(id).centroid.lon;
    if (!best) {
      best = &id;
      continue;
    }
    const double blon = country(*best).centroid.lon;
    const bool better = side == Side::east ? lon > blon : lon < blon;
    if (better || (lon == blon && id < *best)) best = &id;
  }
  return *best;
}

Containment WorldMap::locate(const Country& c, LonLat p) const {
  if (!c.bbox.contains(p)) return Containment::outside;
  bool boundary = false;
  for (const auto& poly : c.geometry) {
    const int o = ring_locate(poly.outer, p);
    if (o == 0) continue;
    if (o == 1) {
      boundary = true;
      continue;
    }
    bool in_hole = false;
    for (const auto& h : poly.holes) {
      const int hl = ring_locate(h, p);
      if (hl == 1) boundary = true;
      if (hl != 0) {
        in_hole = true;
        break;
      }
    }
    if (!in_hole) return Containment::inside;
  }
  return boundary ? Containment::boundary : Containment::outside;
}

std::optional<CountryId> WorldMap::hit_test(LonLat p) const {
  if (!(p.lon >= -180.0 && p.lon <= 180.0 && p.lat >= -90.0 && p.lat <= 90.0)) {
    throw ArgumentError("coordinates out of range");
  }
  const Country* interior = nullptr;
  const Country* edge = nullptr;
  for (const auto& [id, c] : countries_) {
    switch (locate(c, p)) {
      case Containment::inside:
        // Overlapping interiors only arise from stand-in geometry for small
        // states; the smaller country is the more specific hit.
        if (!interior || c.area_km2 < interior->area_km2) interior = &c;
        break;
      case Containment::boundary:
        if (!edge) edge = &c;  // map iteration is id-ascending
        break;
      case Containment::outside:
        break;
    }
  }
  if (interior) return interior->id;
  if (edge) return edge->id;
  return std::nullopt;
}

}  // namespace rdg
