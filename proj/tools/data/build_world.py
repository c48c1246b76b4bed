#!/usr/bin/env python3
"""Builds data/world.geojson, the map interchange file the server loads.

Sources (both fetched from PyPI, not needed at runtime):
  * Natural Earth 1:110m admin-0 polygons, as bundled in the geopandas 0.14
    wheel (geopandas/datasets/naturalearth_lowres).
  * The countryinfo 0.1.2 wheel: areas, subregions, land borders, alternate
    spellings, and small-island geometry missing from Natural Earth.

Both sources are stale in places. Every manual fix lives in the tables below
so the output is reproducible from the two wheels plus this file.

usage: build_world.py NATURALEARTH_SHP_STEM COUNTRYINFO_DATA_DIR OUT_PATH
"""

import glob
import json
import math
import sys

import shapefile  # pyshp

UN_MEMBERS = """
AFG ALB DZA AND AGO ATG ARG ARM AUS AUT AZE BHS BHR BGD BRB BLR BEL BLZ BEN BTN
BOL BIH BWA BRA BRN BGR BFA BDI CPV KHM CMR CAN CAF TCD CHL CHN COL COM COG CRI
CIV HRV CUB CYP CZE PRK COD DNK DJI DMA DOM ECU EGY SLV GNQ ERI EST SWZ ETH FJI
FIN FRA GAB GMB GEO DEU GHA GRC GRD GTM GIN GNB GUY HTI HND HUN ISL IND IDN IRN
IRQ IRL ISR ITA JAM JPN JOR KAZ KEN KIR KWT KGZ LAO LVA LBN LSO LBR LBY LIE LTU
LUX MDG MWI MYS MDV MLI MLT MHL MRT MUS MEX FSM MCO MNG MNE MAR MOZ MMR NAM NRU
NPL NLD NZL NIC NER NGA MKD NOR OMN PAK PLW PAN PNG PRY PER PHL POL PRT QAT KOR
MDA ROU RUS RWA KNA LCA VCT WSM SMR STP SAU SEN SRB SYC SLE SGP SVK SVN SLB SOM
ZAF SSD ESP LKA SDN SUR SWE CHE SYR TJK TZA THA TLS TGO TON TTO TUN TUR TKM TUV
UGA UKR ARE GBR USA URY UZB VUT VEN VNM YEM ZMB ZWE
""".split()

# Non-member territories kept only because real land borders run through them.
BORDER_TERRITORIES = {"PSE", "ESH", "XKX"}

# Natural Earth features with a missing or wrong iso_a3, by NE name.
NE_NAME_TO_ID = {
    "France": "FRA",
    "Norway": "NOR",
    "Kosovo": "XKX",
    "N. Cyprus": "CYP",
    "Somaliland": "SOM",
}

NAMES = {
    "USA": "United States", "GBR": "United Kingdom", "RUS": "Russia",
    "COD": "Democratic Republic of the Congo", "COG": "Republic of the Congo",
    "CIV": "Ivory Coast", "MKD": "North Macedonia", "SWZ": "Eswatini",
    "CZE": "Czechia", "CPV": "Cape Verde", "MMR": "Myanmar", "TLS": "East Timor",
    "PRK": "North Korea", "KOR": "South Korea", "LAO": "Laos", "SYR": "Syria",
    "IRN": "Iran", "VNM": "Vietnam", "BOL": "Bolivia", "VEN": "Venezuela",
    "TZA": "Tanzania", "MDA": "Moldova", "BRN": "Brunei", "PSE": "Palestine",
    "XKX": "Kosovo", "ESH": "Western Sahara", "TTO": "Trinidad and Tobago",
    "GMB": "Gambia", "BHS": "Bahamas", "FSM": "Micronesia", "STP": "Sao Tome and Principe",
    "TUR": "Turkey", "SSD": "South Sudan",
}

EXTRA_ALIASES = {
    "USA": ["America", "United States of America", "USA", "US of A"],
    "GBR": ["UK", "Britain", "Great Britain", "England"],
    "ARE": ["UAE", "Emirates"],
    "COD": ["DRC", "DR Congo", "Congo-Kinshasa"],
    "COG": ["Congo-Brazzaville", "Congo"],
    "CIV": ["Cote d'Ivoire", "Côte d'Ivoire"],
    "MKD": ["Macedonia"],
    "SWZ": ["Swaziland"],
    "CZE": ["Czech Republic"],
    "CPV": ["Cabo Verde"],
    "MMR": ["Burma"],
    "TLS": ["Timor-Leste"],
    "TUR": ["Turkiye", "Türkiye"],
    "NLD": ["Holland"],
    "SSD": ["S. Sudan"],
    "PSE": ["Palestinian Territories", "West Bank"],
    "XKX": [],
    "TTO": ["Trinidad"],
}

# UN M49 subregions unless noted. Sudan follows the African Union grouping
# (Eastern Africa) so that "top of Africa" is the Mediterranean row.
REGION_OVERRIDES = {
    "SSD": "Eastern Africa",
    "SDN": "Eastern Africa",
    "RUS": "Eastern Europe",
    "MMR": "South-Eastern Asia",
    "PSE": "Western Asia",
    "XKX": "Southern Europe",
    "TTO": "Caribbean",
    "CYP": "Western Asia",
    "ARM": "Western Asia",
    "AZE": "Western Asia",
    "GEO": "Western Asia",
    "TUR": "Western Asia",
    "MKD": "Southern Europe",
    "SRB": "Southern Europe",
    "MNE": "Southern Europe",
    "BIH": "Southern Europe",
    "HRV": "Southern Europe",
    "SVN": "Southern Europe",
    "ALB": "Southern Europe",
    "CZE": "Eastern Europe",
    "MEX": "Central America",
    "IRN": "Southern Asia",
    "TLS": "South-Eastern Asia",
}

CONTINENT_OVERRIDES = {
    "RUS": "Europe", "MMR": "Asia", "PSE": "Asia", "XKX": "Europe",
    "TTO": "Americas", "CYP": "Asia", "ARM": "Asia", "AZE": "Asia", "GEO": "Asia",
    "TUR": "Asia",
}

# km^2, CIA World Factbook totals, where countryinfo is missing or wrong.
AREA_OVERRIDES = {
    "SRB": 77474, "XKX": 10887, "PSE": 6020, "MMR": 676578, "TTO": 5128,
    "SSD": 644329, "SDN": 1861484, "HUN": 93028,
}

# Records absent from countryinfo. Borders, areas and subregions per the
# CIA World Factbook and UN M49.
MANUAL_RECORDS = {
    "AND": {"name": "Andorra", "area": 468, "latlng": [42.5, 1.5], "region": "Europe",
            "subregion": "Southern Europe", "borders": ["FRA", "ESP"],
            "altSpellings": ["Principality of Andorra"]},
    "MMR": {"name": "Myanmar", "area": 676578, "latlng": [22.0, 98.0], "region": "Asia",
            "subregion": "South-Eastern Asia",
            "borders": ["BGD", "CHN", "IND", "LAO", "THA"], "altSpellings": ["Burma"]},
    "MNE": {"name": "Montenegro", "area": 13812, "latlng": [42.5, 19.3], "region": "Europe",
            "subregion": "Southern Europe",
            "borders": ["ALB", "BIH", "HRV", "XKX", "SRB"], "altSpellings": ["Crna Gora"]},
    "PSE": {"name": "Palestine", "area": 6020, "latlng": [31.9, 35.2], "region": "Asia",
            "subregion": "Western Asia", "borders": ["EGY", "ISR", "JOR"],
            "altSpellings": ["State of Palestine"]},
    "XKX": {"name": "Kosovo", "area": 10887, "latlng": [42.6, 20.9], "region": "Europe",
            "subregion": "Southern Europe", "borders": ["ALB", "MKD", "MNE", "SRB"],
            "altSpellings": ["Republic of Kosovo"]},
}

CENTER_OVERRIDES = {
    # lat, lon used only when a synthetic polygon is needed
    "MMR": (22.0, 98.0), "TTO": (10.6918, -61.2225),
}

# Land borders per CIA World Factbook, applied on top of countryinfo.
# Each entry is (a, b, present).
BORDER_FIXES = [
    ("EGY", "PSE", True), ("ISR", "PSE", True), ("JOR", "PSE", True),
    ("XKX", "SRB", True), ("XKX", "MKD", True), ("XKX", "ALB", True), ("XKX", "MNE", True),
    ("FRA", "BRA", True), ("FRA", "SUR", True),
    ("CYP", "GBR", False),
    ("ESP", "GBR", False),
    ("MMR", "BGD", True), ("MMR", "IND", True), ("MMR", "CHN", True),
    ("MMR", "LAO", True), ("MMR", "THA", True),
    ("SSD", "SDN", True), ("SSD", "CAF", True), ("SSD", "COD", True),
    ("SSD", "UGA", True), ("SSD", "KEN", True), ("SSD", "ETH", True),
    ("SOM", "DJI", True), ("SOM", "ETH", True), ("SOM", "KEN", True),
    ("HUN", "AUT", True), ("HUN", "SVK", True), ("HUN", "UKR", True),
    ("HUN", "ROU", True), ("HUN", "SRB", True), ("HUN", "HRV", True), ("HUN", "SVN", True),
    ("RUS", "KAZ", True), ("RUS", "MNG", True), ("RUS", "CHN", True), ("RUS", "PRK", True),
    ("RUS", "GEO", True), ("RUS", "AZE", True),
    ("TLS", "IDN", True),
    ("MAR", "ESP", True),
    ("DOM", "HTI", True),
    ("GBR", "IRL", True),
    ("DNK", "DEU", True),
    ("ZAF", "LSO", True),
    ("ITA", "SMR", True), ("FRA", "MCO", True), ("FRA", "AND", True), ("ESP", "AND", True),
    ("CHE", "LIE", True), ("AUT", "LIE", True),
    ("SEN", "GMB", True),
    ("CAN", "USA", True), ("MEX", "USA", True),
    ("NLD", "BEL", True), ("NLD", "DEU", True),
    ("BRN", "MYS", True), ("PNG", "IDN", True), ("MYS", "IDN", True), ("MYS", "THA", True),
    ("QAT", "SAU", True), ("KWT", "IRQ", True), ("KWT", "SAU", True),
    ("AFG", "IND", False), ("SSD", "TCD", False),
]


# Alternate spellings that are ordinary English words.
ALIAS_BLOCKLIST = {"Island"}


def ring_area(ring):
    s = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:] + ring[:1]):
        s += x1 * y2 - x2 * y1
    return s / 2.0


def ring_centroid(ring):
    a = ring_area(ring)
    cx = cy = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:] + ring[:1]):
        f = x1 * y2 - x2 * y1
        cx += (x1 + x2) * f
        cy += (y1 + y2) * f
    return cx / (6 * a), cy / (6 * a)


def point_in_ring(pt, ring):
    x, y = pt
    inside = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside


def strip_closing(ring):
    ring = [(float(x), float(y)) for x, y in ring]
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring = ring[:-1]
    return ring


def shape_polygons(shape):
    """Groups shapefile parts into [outer, hole...] polygons."""
    parts = list(shape.parts) + [len(shape.points)]
    rings = [strip_closing(shape.points[parts[i]:parts[i + 1]]) for i in range(len(parts) - 1)]
    outers, holes = [], []
    for r in rings:
        # shapefile outer rings are clockwise
        (outers if ring_area(r) < 0 else holes).append(r)
    polys = [[o] for o in outers]
    for h in holes:
        for p in polys:
            if point_in_ring(h[0], p[0]):
                p.append(h)
                break
    return polys


def geojson_polygons(geom):
    if geom["type"] == "Polygon":
        coords = [geom["coordinates"]]
    else:
        coords = geom["coordinates"]
    return [[strip_closing(r) for r in poly] for poly in coords]


def spherical_area_km2(polys):
    r = 6371.0088
    total = 0.0
    for poly in polys:
        for i, ring in enumerate(poly):
            s = 0.0
            for (x1, y1), (x2, y2) in zip(ring, ring[1:] + ring[:1]):
                s += math.radians(x2 - x1) * (2 + math.sin(math.radians(y1)) + math.sin(math.radians(y2)))
            a = abs(s * r * r / 2.0)
            total += a if i == 0 else -a
    return total


def octagon(lat, lon, area_km2):
    """Equal-area stand-in for states too small for the 1:110m source."""
    km_per_deg_lat = 111.32
    km_per_deg_lon = 111.32 * math.cos(math.radians(lat))
    radius_km = math.sqrt(area_km2 / (2 * math.sqrt(2)))
    radius_km = max(radius_km, 8.0)
    ring = []
    for k in range(8):
        t = 2 * math.pi * k / 8 + math.pi / 8
        ring.append((lon + radius_km * math.cos(t) / km_per_deg_lon,
                     lat + radius_km * math.sin(t) / km_per_deg_lat))
    ring.reverse()
    return [[ring]]


def rounded(polys):
    out = []
    for poly in polys:
        rings = []
        for r in poly:
            rr = [[round(x, 4), round(y, 4)] for x, y in r]
            # GeoJSON rings are closed; exterior counter-clockwise
            rings.append(rr + [rr[0]])
        ext = rings[0]
        if ring_area([tuple(p) for p in ext[:-1]]) < 0:
            rings[0] = list(reversed(ext))
        for i in range(1, len(rings)):
            if ring_area([tuple(p) for p in rings[i][:-1]]) > 0:
                rings[i] = list(reversed(rings[i]))
        out.append(rings)
    return out


def main():
    ne_stem, ci_dir, out_path = sys.argv[1:4]

    info = {}
    for f in sorted(glob.glob(ci_dir + "/*.json")):
        d = json.load(open(f, encoding="utf-8"))
        iso = d.get("ISO", {}).get("alpha3") if isinstance(d.get("ISO"), dict) else None
        if iso and d.get("name") and iso not in info:
            info[iso] = d
    info.update(MANUAL_RECORDS)

    wanted = set(UN_MEMBERS) | BORDER_TERRITORIES
    assert len(set(UN_MEMBERS)) == 193, len(set(UN_MEMBERS))

    geometry = {}
    ne_names = {}
    reader = shapefile.Reader(ne_stem)
    for sr in reader.shapeRecords():
        rec = sr.record
        cid = NE_NAME_TO_ID.get(rec["name"], rec["iso_a3"])
        if cid not in wanted:
            continue
        geometry.setdefault(cid, []).extend(shape_polygons(sr.shape))
        if rec["name"] not in NE_NAME_TO_ID:
            ne_names[cid] = rec["name"]

    synthetic = []
    for cid in sorted(wanted):
        if cid in geometry:
            continue
        d = info.get(cid)
        g = d.get("geoJSON") if d else None
        if g and g.get("features"):
            polys = []
            for feat in g["features"]:
                polys.extend(geojson_polygons(feat["geometry"]))
            geometry[cid] = polys
            continue
        if d is None:
            raise SystemExit("no geometry or record for " + cid)
        area = AREA_OVERRIDES.get(cid) or d["area"]
        lat, lon = CENTER_OVERRIDES.get(cid) or d["latlng"]
        geometry[cid] = octagon(lat, lon, area)
        synthetic.append(cid)

    borders = {cid: set() for cid in wanted}
    for cid in wanted:
        d = info.get(cid)
        for b in (d.get("borders") if d else []) or []:
            b = {"KOS": "XKX"}.get(b, b)
            if b in wanted and b != cid:
                borders[cid].add(b)
                borders[b].add(cid)
    for a, b, present in BORDER_FIXES:
        if present:
            borders[a].add(b)
            borders[b].add(a)
        else:
            borders[a].discard(b)
            borders[b].discard(a)

    features = []
    taken = {}
    for cid in sorted(wanted):
        d = info.get(cid, {})
        name = NAMES.get(cid) or d.get("name")
        polys = geometry[cid]
        main = max(polys, key=lambda p: abs(ring_area(p[0])))
        cx, cy = ring_centroid(main[0])
        area = AREA_OVERRIDES.get(cid) or d.get("area") or round(spherical_area_km2(polys))
        region = REGION_OVERRIDES.get(cid) or d.get("subregion")
        continent = CONTINENT_OVERRIDES.get(cid) or d.get("region")
        aliases = []
        for a in list(EXTRA_ALIASES.get(cid, [])) + [ne_names.get(cid, "")] + list(d.get("altSpellings", [])):
            a = a.strip()
            if not a or a.casefold() == name.casefold() or a in ALIAS_BLOCKLIST:
                continue
            if len(a) < 3 and a not in ("UK",):
                continue
            if a not in aliases:
                aliases.append(a)
        features.append({
            "type": "Feature",
            "properties": {
                "id": cid,
                "name": name,
                "aliases": aliases,
                "region": region,
                "continent": continent,
                "area_km2": area,
                "centroid": [round(cx, 4), round(cy, 4)],
                "neighbors": sorted(borders[cid]),
                "selectable": cid in UN_MEMBERS,
                "synthetic_geometry": cid in synthetic,
            },
            "geometry": {"type": "MultiPolygon", "coordinates": rounded(polys)},
        })
        taken.setdefault(name.casefold(), []).append(cid)

    # every alias must name exactly one country
    owners = {}
    for f in features:
        p = f["properties"]
        for a in p["aliases"]:
            owners.setdefault(a.casefold(), set()).add(p["id"])
    for f in features:
        p = f["properties"]
        p["aliases"] = [a for a in p["aliases"]
                        if len(owners[a.casefold()]) == 1 and a.casefold() not in taken]

    out = {"type": "FeatureCollection", "features": features}
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, ensure_ascii=False, separators=(",", ":"), sort_keys=False)
        fh.write("\n")

    print("countries:", len(features), "selectable:", sum(f["properties"]["selectable"] for f in features))
    print("synthetic geometry:", " ".join(synthetic))
    for f in features:
        p = f["properties"]
        if not p["region"] or not p["continent"]:
            print("MISSING REGION", p["id"])


if __name__ == "__main__":
    main()
