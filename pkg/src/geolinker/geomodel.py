"""Core geographic types and the small computational-geometry kernel.

Everything here is an immutable value: points, bounding boxes, the
geometry union (Point/MultiPoint/LineString/MultiLineString/Polygon/
MultiPolygon), the seven-value location-type taxonomy, and the resolved
annotation tuple. On top of those sit the handful of geometric
operations the rest of the engine needs: bbox algebra, exact
intersection tests, centroids, and great-circle distance.

Conventions: coordinates are (lon, lat) degrees, rings are closed (first
point equals last, within 1e-9 degrees), and boundary contact counts as
intersecting. Bounding boxes that cross the antimeridian are rejected at
construction; the corpora this engine targets never need them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

EARTH_RADIUS_KM = 6371.0
RING_CLOSE_TOL = 1e-9


class LocationType(Enum):
    """The seven place types, ranked coarse (0) to fine (6).

    The rank drives zoom-dependent abstraction: low zoom levels only show
    low-ranked (large) features.
    """

    COUNTRY = 0
    PROVINCE = 1
    WATER = 2
    MUNICIPALITY = 3
    NEIGHBORHOOD = 4
    ROAD = 5
    BUILDING = 6

    @property
    def rank(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_label(cls, label: str) -> "LocationType":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown location type: {label!r}") from None


def _check_finite(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self) -> None:
        _check_finite("lon", self.lon)
        _check_finite("lat", self.lat)
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"lon out of range: {self.lon}")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat out of range: {self.lat}")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in degrees. Degenerate (zero-extent) boxes are fine."""

    west: float
    south: float
    east: float
    north: float

    def __post_init__(self) -> None:
        for name in ("west", "south", "east", "north"):
            _check_finite(name, getattr(self, name))
        if self.west > self.east:
            raise ValueError(
                f"west > east ({self.west} > {self.east}); "
                "antimeridian-crossing boxes are not supported"
            )
        if self.south > self.north:
            raise ValueError(f"south > north ({self.south} > {self.north})")

    def intersects(self, other: "BBox") -> bool:
        return bbox_intersects(self, other)

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.west, other.west),
            min(self.south, other.south),
            max(self.east, other.east),
            max(self.north, other.north),
        )

    def as_list(self) -> list[float]:
        return [self.west, self.south, self.east, self.north]

    @classmethod
    def from_list(cls, values) -> "BBox":
        if len(values) != 4:
            raise ValueError(f"bbox needs 4 values, got {len(values)}")
        return cls(*(float(v) for v in values))


class Geometry:
    """Marker base class for the geometry union."""

    __slots__ = ()


def _as_ring(points) -> tuple[GeoPoint, ...]:
    ring = tuple(points)
    if len(ring) < 4:
        raise ValueError(f"ring needs at least 4 points, got {len(ring)}")
    first, last = ring[0], ring[-1]
    if abs(first.lon - last.lon) > RING_CLOSE_TOL or abs(first.lat - last.lat) > RING_CLOSE_TOL:
        raise ValueError("ring is not closed")
    if first != last:
        ring = ring[:-1] + (first,)  # snap the closure exactly
    return ring


@dataclass(frozen=True)
class Point(Geometry):
    coord: GeoPoint


@dataclass(frozen=True)
class MultiPoint(Geometry):
    points: tuple[GeoPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("MultiPoint needs at least one point")


@dataclass(frozen=True)
class LineString(Geometry):
    coords: tuple[GeoPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) < 2:
            raise ValueError("LineString needs at least 2 points")


@dataclass(frozen=True)
class MultiLineString(Geometry):
    lines: tuple[LineString, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.lines:
            raise ValueError("MultiLineString needs at least one line")


@dataclass(frozen=True)
class Polygon(Geometry):
    outer: tuple[GeoPoint, ...]
    holes: tuple[tuple[GeoPoint, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "outer", _as_ring(self.outer))
        object.__setattr__(self, "holes", tuple(_as_ring(h) for h in self.holes))

    def rings(self):
        yield self.outer
        yield from self.holes


@dataclass(frozen=True)
class MultiPolygon(Geometry):
    polygons: tuple[Polygon, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "polygons", tuple(self.polygons))
        if not self.polygons:
            raise ValueError("MultiPolygon needs at least one polygon")


@dataclass(frozen=True)
class Annotation:
    """The resolved tuple attached to a document: who, where in the text,
    how sure, and the feature's bounding box."""

    feature_uri: str
    span: tuple[int, int]
    confidence: float
    bbox: BBox

    def __post_init__(self) -> None:
        start, end = self.span
        if not 0 <= start < end:
            raise ValueError(f"invalid span {self.span}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")


# ---------------------------------------------------------------------------
# bbox algebra


def bbox_of(g: Geometry) -> BBox:
    """Smallest axis-aligned box containing every vertex of ``g``."""
    pts = _vertices(g)
    lons = [p.lon for p in pts]
    lats = [p.lat for p in pts]
    return BBox(min(lons), min(lats), max(lons), max(lats))


def bbox_intersects(a: BBox, b: BBox) -> bool:
    """True when the boxes share at least one point (touching counts)."""
    return a.west <= b.east and b.west <= a.east and a.south <= b.north and b.south <= a.north


def _vertices(g: Geometry) -> list[GeoPoint]:
    if isinstance(g, Point):
        return [g.coord]
    if isinstance(g, MultiPoint):
        return list(g.points)
    if isinstance(g, LineString):
        return list(g.coords)
    if isinstance(g, MultiLineString):
        return [p for line in g.lines for p in line.coords]
    if isinstance(g, Polygon):
        return [p for ring in g.rings() for p in ring]
    if isinstance(g, MultiPolygon):
        return [p for poly in g.polygons for p in _vertices(poly)]
    raise TypeError(f"not a geometry: {g!r}")


# ---------------------------------------------------------------------------
# exact intersection tests
#
# Every geometry decomposes into points, segments, and polygons; the
# pairwise primitives below use orientation signs and ray casting with
# inclusive boundaries (touching counts as intersecting).


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _on_segment(px, py, ax, ay, bx, by) -> bool:
    if _cross(ax, ay, bx, by, px, py) != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_intersect(a1, a2, b1, b2) -> bool:
    d1 = _cross(b1.lon, b1.lat, b2.lon, b2.lat, a1.lon, a1.lat)
    d2 = _cross(b1.lon, b1.lat, b2.lon, b2.lat, a2.lon, a2.lat)
    d3 = _cross(a1.lon, a1.lat, a2.lon, a2.lat, b1.lon, b1.lat)
    d4 = _cross(a1.lon, a1.lat, a2.lon, a2.lat, b2.lon, b2.lat)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    # collinear / endpoint-touching cases
    if d1 == 0 and _on_segment(a1.lon, a1.lat, b1.lon, b1.lat, b2.lon, b2.lat):
        return True
    if d2 == 0 and _on_segment(a2.lon, a2.lat, b1.lon, b1.lat, b2.lon, b2.lat):
        return True
    if d3 == 0 and _on_segment(b1.lon, b1.lat, a1.lon, a1.lat, a2.lon, a2.lat):
        return True
    if d4 == 0 and _on_segment(b2.lon, b2.lat, a1.lon, a1.lat, a2.lon, a2.lat):
        return True
    return False


def _point_on_ring(p: GeoPoint, ring) -> bool:
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if _on_segment(p.lon, p.lat, a.lon, a.lat, b.lon, b.lat):
            return True
    return False


def _point_in_ring(p: GeoPoint, ring) -> bool:
    """Ray-casting parity test; boundary points count as inside."""
    if _point_on_ring(p, ring):
        return True
    inside = False
    x, y = p.lon, p.lat
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if (a.lat > y) != (b.lat > y):
            x_hit = a.lon + (y - a.lat) * (b.lon - a.lon) / (b.lat - a.lat)
            if x < x_hit:
                inside = not inside
    return inside


def point_in_polygon(p: GeoPoint, poly: Polygon) -> bool:
    """Inside the outer ring and not strictly inside any hole.

    Points on any ring boundary (outer or hole) count as inside.
    """
    if _point_on_ring(p, poly.outer):
        return True
    if not _point_in_ring(p, poly.outer):
        return False
    for hole in poly.holes:
        if _point_on_ring(p, hole):
            return True
        if _point_in_ring(p, hole):
            return False
    return True


def _parts(g: Geometry):
    """Decompose into (points, segment lists, polygons)."""
    points: list[GeoPoint] = []
    lines: list[tuple[GeoPoint, ...]] = []
    polys: list[Polygon] = []
    if isinstance(g, Point):
        points.append(g.coord)
    elif isinstance(g, MultiPoint):
        points.extend(g.points)
    elif isinstance(g, LineString):
        lines.append(g.coords)
    elif isinstance(g, MultiLineString):
        lines.extend(line.coords for line in g.lines)
    elif isinstance(g, Polygon):
        polys.append(g)
    elif isinstance(g, MultiPolygon):
        polys.extend(g.polygons)
    else:
        raise TypeError(f"not a geometry: {g!r}")
    return points, lines, polys


def _segments(coords):
    for i in range(len(coords) - 1):
        yield coords[i], coords[i + 1]


def _line_touches_line(la, lb) -> bool:
    return any(
        _segments_intersect(a1, a2, b1, b2) for a1, a2 in _segments(la) for b1, b2 in _segments(lb)
    )


def _line_touches_polygon(line, poly: Polygon) -> bool:
    for ring in poly.rings():
        if _line_touches_line(line, ring):
            return True
    return any(point_in_polygon(p, poly) for p in line)


def _polygons_touch(pa: Polygon, pb: Polygon) -> bool:
    for ring_a in pa.rings():
        for ring_b in pb.rings():
            if _line_touches_line(ring_a, ring_b):
                return True
    # containment without edge contact; holes are handled by point_in_polygon
    if any(point_in_polygon(p, pb) for p in pa.outer):
        return True
    return any(point_in_polygon(p, pa) for p in pb.outer)


def geometries_intersect(a: Geometry, b: Geometry) -> bool:
    """Exact intersection test with inclusive boundaries."""
    if not bbox_intersects(bbox_of(a), bbox_of(b)):
        return False
    pts_a, lines_a, polys_a = _parts(a)
    pts_b, lines_b, polys_b = _parts(b)

    for p in pts_a:
        if any(p == q for q in pts_b):
            return True
        if any(_point_on_ring(p, line) if len(line) > 1 else False for line in lines_b):
            return True
        if any(point_in_polygon(p, poly) for poly in polys_b):
            return True
    for q in pts_b:
        if any(_point_on_ring(q, line) for line in lines_a):
            return True
        if any(point_in_polygon(q, poly) for poly in polys_a):
            return True
    for la in lines_a:
        if any(_line_touches_line(la, lb) for lb in lines_b):
            return True
        if any(_line_touches_polygon(la, poly) for poly in polys_b):
            return True
    for lb in lines_b:
        if any(_line_touches_polygon(lb, poly) for poly in polys_a):
            return True
    for pa in polys_a:
        if any(_polygons_touch(pa, pb) for pb in polys_b):
            return True
    return False


# ---------------------------------------------------------------------------
# centroids and distance


def _ring_area_centroid(ring):
    """Planar shoelace area and centroid of a closed ring (signed area)."""
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        w = a.lon * b.lat - b.lon * a.lat
        area2 += w
        cx += (a.lon + b.lon) * w
        cy += (a.lat + b.lat) * w
    if area2 == 0.0:
        # degenerate ring: fall back to the vertex mean
        n = len(ring) - 1
        return 0.0, sum(p.lon for p in ring[:-1]) / n, sum(p.lat for p in ring[:-1]) / n
    return area2 / 2.0, cx / (3.0 * area2), cy / (3.0 * area2)


def _line_centroid(coords):
    total = 0.0
    cx = 0.0
    cy = 0.0
    for a, b in _segments(coords):
        seg_len = math.hypot(b.lon - a.lon, b.lat - a.lat)
        total += seg_len
        cx += seg_len * (a.lon + b.lon) / 2.0
        cy += seg_len * (a.lat + b.lat) / 2.0
    if total == 0.0:
        return 0.0, coords[0].lon, coords[0].lat
    return total, cx / total, cy / total


def centroid(g: Geometry) -> GeoPoint:
    """Planar centroid on lon/lat; fine at the sub-country sizes stored here.

    Point: itself. LineString: length-weighted midpoint. Polygon:
    area-weighted centroid of the outer ring. Multi variants: weighted
    mean of their members (count, length, or area weights).
    """
    if isinstance(g, Point):
        return g.coord
    if isinstance(g, MultiPoint):
        n = len(g.points)
        return GeoPoint(sum(p.lon for p in g.points) / n, sum(p.lat for p in g.points) / n)
    if isinstance(g, LineString):
        _, cx, cy = _line_centroid(g.coords)
        return GeoPoint(cx, cy)
    if isinstance(g, MultiLineString):
        parts = [_line_centroid(line.coords) for line in g.lines]
        total = sum(w for w, _, _ in parts)
        if total == 0.0:
            n = len(parts)
            return GeoPoint(sum(cx for _, cx, _ in parts) / n, sum(cy for _, _, cy in parts) / n)
        return GeoPoint(
            sum(w * cx for w, cx, _ in parts) / total,
            sum(w * cy for w, _, cy in parts) / total,
        )
    if isinstance(g, Polygon):
        _, cx, cy = _ring_area_centroid(g.outer)
        return GeoPoint(cx, cy)
    if isinstance(g, MultiPolygon):
        parts = [_ring_area_centroid(p.outer) for p in g.polygons]
        total = sum(abs(area) for area, _, _ in parts)
        if total == 0.0:
            n = len(parts)
            return GeoPoint(sum(cx for _, cx, _ in parts) / n, sum(cy for _, _, cy in parts) / n)
        return GeoPoint(
            sum(abs(area) * cx for area, cx, _ in parts) / total,
            sum(abs(area) * cy for area, _, cy in parts) / total,
        )
    raise TypeError(f"not a geometry: {g!r}")


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in kilometers (Earth radius 6371.0 km)."""
    lat1 = math.radians(a.lat)
    lat2 = math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


# ---------------------------------------------------------------------------
# GeoJSON (RFC 7946 geometry objects)


def _pt(p: GeoPoint) -> list[float]:
    return [p.lon, p.lat]


def geometry_to_geojson(g: Geometry) -> dict:
    if isinstance(g, Point):
        return {"type": "Point", "coordinates": _pt(g.coord)}
    if isinstance(g, MultiPoint):
        return {"type": "MultiPoint", "coordinates": [_pt(p) for p in g.points]}
    if isinstance(g, LineString):
        return {"type": "LineString", "coordinates": [_pt(p) for p in g.coords]}
    if isinstance(g, MultiLineString):
        return {
            "type": "MultiLineString",
            "coordinates": [[_pt(p) for p in line.coords] for line in g.lines],
        }
    if isinstance(g, Polygon):
        return {
            "type": "Polygon",
            "coordinates": [[_pt(p) for p in ring] for ring in g.rings()],
        }
    if isinstance(g, MultiPolygon):
        return {
            "type": "MultiPolygon",
            "coordinates": [
                [[_pt(p) for p in ring] for ring in poly.rings()] for poly in g.polygons
            ],
        }
    raise TypeError(f"not a geometry: {g!r}")


def _coords_to_points(coords) -> list[GeoPoint]:
    return [GeoPoint(float(c[0]), float(c[1])) for c in coords]


def geometry_from_geojson(obj: dict) -> Geometry:
    try:
        kind = obj["type"]
        coords = obj["coordinates"]
    except (TypeError, KeyError) as exc:
        raise ValueError(f"not a GeoJSON geometry: {obj!r}") from exc
    if kind == "Point":
        return Point(GeoPoint(float(coords[0]), float(coords[1])))
    if kind == "MultiPoint":
        return MultiPoint(tuple(_coords_to_points(coords)))
    if kind == "LineString":
        return LineString(tuple(_coords_to_points(coords)))
    if kind == "MultiLineString":
        return MultiLineString(tuple(LineString(tuple(_coords_to_points(c))) for c in coords))
    if kind == "Polygon":
        rings = [_coords_to_points(ring) for ring in coords]
        return Polygon(tuple(rings[0]), tuple(tuple(r) for r in rings[1:]))
    if kind == "MultiPolygon":
        polys = []
        for poly_coords in coords:
            rings = [_coords_to_points(ring) for ring in poly_coords]
            polys.append(Polygon(tuple(rings[0]), tuple(tuple(r) for r in rings[1:])))
        return MultiPolygon(tuple(polys))
    raise ValueError(f"unsupported geometry type: {kind!r}")
