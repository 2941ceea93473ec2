"""OSM XML ingestion: parse Node/Way/Relation elements and denormalize
them into standalone named features with concrete geometries.

OSM stores geometry by reference (ways point at node ids, multipolygon
relations point at ways); a gazetteer wants self-contained features. The
pipeline here is: stream-parse the XML snapshot, resolve references in
two passes (node coordinates first, then ways/relations), classify each
element against an editable tag-to-type rule table, and extract primary
and alternate names. Nameless or untypable elements are dropped: the
gazetteer's unit is the toponym, and unnamed geometry can never be
detected in text.

Only the XML snapshot path of the OSM 0.6 schema is supported; binary
dumps and incremental diffs are not.
"""

from __future__ import annotations

import importlib.resources
import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .geomodel import (
    GeoPoint,
    Geometry,
    LineString,
    LocationType,
    MultiPolygon,
    Point,
    Polygon,
    bbox_of,
    geometry_from_geojson,
    geometry_to_geojson,
    point_in_polygon,
)

log = logging.getLogger(__name__)

NODE = "node"
WAY = "way"
RELATION = "relation"
_KINDS = (NODE, WAY, RELATION)

_NAME_KEYS = ("alt_name", "old_name", "loc_name")


class MalformedXml(Exception):
    """Raised when the input is not well-formed XML; carries the position."""


class RingAssemblyFailure(Exception):
    """A multipolygon relation whose member ways do not stitch into closed rings."""


@dataclass(frozen=True)
class OsmElement:
    kind: str
    id: int
    tags: dict[str, str] = field(default_factory=dict)
    lon: float | None = None
    lat: float | None = None
    refs: tuple[int, ...] = ()
    members: tuple[tuple[str, int, str], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown element kind: {self.kind!r}")


@dataclass(frozen=True)
class RawFeature:
    """A denormalized candidate gazetteer entry."""

    source_ids: tuple[tuple[str, int], ...]
    geometry: Geometry
    loc_type: LocationType
    primary_name: str
    alt_names: tuple[str, ...] = ()
    tags: dict[str, str] = field(default_factory=dict)

    def to_geojson(self) -> dict:
        return {
            "type": "Feature",
            "geometry": geometry_to_geojson(self.geometry),
            "bbox": bbox_of(self.geometry).as_list(),
            "properties": {
                "loc_type": self.loc_type.label,
                "primary_name": self.primary_name,
                "alt_names": list(self.alt_names),
                "source_ids": [[kind, eid] for kind, eid in self.source_ids],
            },
        }

    @classmethod
    def from_geojson(cls, obj: dict) -> "RawFeature":
        props = obj["properties"]
        return cls(
            source_ids=tuple((k, int(i)) for k, i in props["source_ids"]),
            geometry=geometry_from_geojson(obj["geometry"]),
            loc_type=LocationType.from_label(props["loc_type"]),
            primary_name=props["primary_name"],
            alt_names=tuple(props["alt_names"]),
        )


# ---------------------------------------------------------------------------
# XML parsing


def parse_osm_xml(source) -> list[OsmElement]:
    """Parse an OSM 0.6 XML snapshot into elements, in document order.

    ``source`` is a path or a binary file object. Unknown elements are
    skipped; duplicated ids within a kind keep the first occurrence and
    log a warning; structurally broken elements (a node without
    coordinates, a way without refs) are skipped with a warning.
    """
    elements: list[OsmElement] = []
    seen: dict[str, set[int]] = {NODE: set(), WAY: set(), RELATION: set()}
    try:
        for _, elem in ET.iterparse(source, events=("end",)):
            if elem.tag not in _KINDS:
                continue
            parsed = _parse_element(elem)
            elem.clear()
            if parsed is None:
                continue
            if parsed.id in seen[parsed.kind]:
                log.warning("duplicate %s id %d: keeping first", parsed.kind, parsed.id)
                continue
            seen[parsed.kind].add(parsed.id)
            elements.append(parsed)
    except ET.ParseError as exc:
        raise MalformedXml(f"malformed OSM XML at line {exc.position[0]}, "
                           f"column {exc.position[1]}: {exc}") from exc
    return elements


def _parse_element(elem) -> OsmElement | None:
    try:
        eid = int(elem.attrib["id"])
    except (KeyError, ValueError):
        log.warning("skipping <%s> without a valid id", elem.tag)
        return None
    tags = {t.attrib["k"]: t.attrib.get("v", "") for t in elem.iter("tag") if "k" in t.attrib}
    if elem.tag == NODE:
        try:
            lon = float(elem.attrib["lon"])
            lat = float(elem.attrib["lat"])
        except (KeyError, ValueError):
            log.warning("skipping node %d without coordinates", eid)
            return None
        return OsmElement(NODE, eid, tags, lon=lon, lat=lat)
    if elem.tag == WAY:
        refs = tuple(int(nd.attrib["ref"]) for nd in elem.iter("nd") if "ref" in nd.attrib)
        if not refs:
            log.warning("skipping way %d without node refs", eid)
            return None
        return OsmElement(WAY, eid, tags, refs=refs)
    members = tuple(
        (m.attrib.get("type", ""), int(m.attrib["ref"]), m.attrib.get("role", ""))
        for m in elem.iter("member")
        if "ref" in m.attrib
    )
    if not members:
        log.warning("skipping relation %d without members", eid)
        return None
    return OsmElement(RELATION, eid, tags, members=members)


# ---------------------------------------------------------------------------
# type classification (data-driven rule table)


def _load_rules() -> list[dict]:
    raw = importlib.resources.files("geolinker").joinpath("data/loctype_rules.json")
    return json.loads(raw.read_text(encoding="utf-8"))


_RULES = _load_rules()


def _condition_matches(cond: dict, tags: dict[str, str], is_polygon: bool) -> bool:
    value = tags.get(cond["key"])
    if value is None:
        return False
    if "values" in cond and value not in cond["values"]:
        return False
    if cond.get("requires_polygon") and not is_polygon:
        return False
    if "admin_level_min" in cond or "admin_level_max" in cond:
        try:
            level = int(tags["admin_level"])
        except (KeyError, ValueError):
            return False
        if level < cond.get("admin_level_min", 0) or level > cond.get("admin_level_max", 99):
            return False
    return True


def classify_location_type(tags: dict[str, str], *, is_polygon: bool = False) -> LocationType | None:
    """First-match lookup over the ordered rule table; None means ignore.

    ``is_polygon`` feeds the rules that only apply to area features
    (amenity/historic buildings).
    """
    for rule in _RULES:
        for cond in rule["any"]:
            if _condition_matches(cond, tags, is_polygon):
                return LocationType.from_label(rule["type"])
    return None


# ---------------------------------------------------------------------------
# denormalization


def _extract_names(tags: dict[str, str]) -> tuple[str, list[str]] | None:
    primary = tags.get("name", "").strip()
    if not primary:
        return None
    alt: list[str] = []
    for key, value in tags.items():
        if key.startswith("name:") or key in _NAME_KEYS:
            for part in value.split(";"):
                part = part.strip()
                if part and part != primary and part not in alt:
                    alt.append(part)
    return primary, alt


def _stitch_rings(segments: list[list[int]]) -> list[list[int]]:
    """Join way node-id sequences into closed rings by shared endpoints."""
    pool = [list(s) for s in segments if len(s) >= 2]
    rings: list[list[int]] = []
    while pool:
        chain = pool.pop(0)
        while chain[0] != chain[-1]:
            for i, seg in enumerate(pool):
                if seg[0] == chain[-1]:
                    chain.extend(seg[1:])
                elif seg[-1] == chain[-1]:
                    chain.extend(reversed(seg[:-1]))
                elif seg[-1] == chain[0]:
                    chain[0:0] = seg[:-1]
                elif seg[0] == chain[0]:
                    chain[0:0] = list(reversed(seg[1:]))
                else:
                    continue
                pool.pop(i)
                break
            else:
                raise RingAssemblyFailure("open ring: no segment continues the chain")
        if len(chain) < 4:
            raise RingAssemblyFailure(f"ring has only {len(chain) - 1} distinct points")
        rings.append(chain)
    return rings


def _ring_coords(ring_ids: list[int], nodes: dict[int, GeoPoint]) -> tuple[GeoPoint, ...]:
    return tuple(nodes[i] for i in ring_ids)


def _assemble_multipolygon(
    rel: OsmElement, ways: dict[int, OsmElement], nodes: dict[int, GeoPoint]
) -> MultiPolygon:
    outer_segs: list[list[int]] = []
    inner_segs: list[list[int]] = []
    for kind, ref, role in rel.members:
        if kind != WAY:
            continue
        way = ways.get(ref)
        if way is None or any(r not in nodes for r in way.refs):
            raise RingAssemblyFailure(f"member way {ref} missing or has dangling refs")
        (inner_segs if role == "inner" else outer_segs).append(list(way.refs))
    if not outer_segs:
        raise RingAssemblyFailure("no outer member ways")
    outers = [_ring_coords(r, nodes) for r in _stitch_rings(outer_segs)]
    inners = [_ring_coords(r, nodes) for r in _stitch_rings(inner_segs)] if inner_segs else []

    shells = [Polygon(o) for o in outers]
    holes_per_shell: list[list[tuple[GeoPoint, ...]]] = [[] for _ in shells]
    for inner in inners:
        for idx, shell in enumerate(shells):
            if point_in_polygon(inner[0], shell):
                holes_per_shell[idx].append(inner)
                break
        else:
            log.warning("relation %d: inner ring not inside any outer, dropped", rel.id)
    return MultiPolygon(
        tuple(Polygon(o, tuple(holes)) for o, holes in zip(outers, holes_per_shell))
    )


def denormalize(elements: list[OsmElement]) -> list[RawFeature]:
    """Turn parsed elements into named, typed, self-contained features.

    Nodes become Points, open ways LineStrings, closed ways Polygons, and
    multipolygon relations MultiPolygons with stitched rings. Elements
    without a usable name or location type are dropped; broken geometry
    (dangling refs, unstitchable rings, invalid rings) is dropped with a
    warning rather than repaired.
    """
    nodes: dict[int, GeoPoint] = {}
    for el in elements:  # pass 1: node coordinates
        if el.kind == NODE:
            try:
                nodes[el.id] = GeoPoint(el.lon, el.lat)
            except ValueError as exc:
                log.warning("node %d has invalid coordinates: %s", el.id, exc)
    ways = {el.id: el for el in elements if el.kind == WAY}

    features: list[RawFeature] = []
    for el in elements:  # pass 2: geometry assembly in document order
        names = _extract_names(el.tags)
        if names is None:
            continue
        primary, alt = names
        geometry = _element_geometry(el, nodes, ways)
        if geometry is None:
            continue
        loc_type = classify_location_type(
            el.tags, is_polygon=isinstance(geometry, (Polygon, MultiPolygon))
        )
        if loc_type is None:
            continue
        features.append(
            RawFeature(
                source_ids=((el.kind, el.id),),
                geometry=geometry,
                loc_type=loc_type,
                primary_name=primary,
                alt_names=tuple(alt),
                tags=dict(el.tags),
            )
        )
    return features


def _element_geometry(el: OsmElement, nodes, ways) -> Geometry | None:
    if el.kind == NODE:
        point = nodes.get(el.id)
        return Point(point) if point is not None else None
    if el.kind == WAY:
        if any(r not in nodes for r in el.refs):
            log.warning("way %d has dangling node refs, dropped", el.id)
            return None
        coords = tuple(nodes[r] for r in el.refs)
        try:
            if el.refs[0] == el.refs[-1]:
                return Polygon(coords)
            return LineString(coords)
        except ValueError as exc:
            log.warning("way %d has invalid geometry, dropped: %s", el.id, exc)
            return None
    if el.tags.get("type") != "multipolygon":
        return None
    try:
        return _assemble_multipolygon(el, ways, nodes)
    except RingAssemblyFailure as exc:
        log.warning("relation %d dropped: %s", el.id, exc)
        return None


# ---------------------------------------------------------------------------
# NDJSON output


def write_features_ndjson(features: list[RawFeature], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for feat in features:
            fh.write(json.dumps(feat.to_geojson(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_features_ndjson(path) -> list[RawFeature]:
    features = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                features.append(RawFeature.from_geojson(json.loads(line)))
    return features
