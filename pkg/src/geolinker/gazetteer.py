"""Gazetteer construction: merge raw features into canonical entries,
assign stable URIs, and maintain the name index used for lookup.

OSM splits one real-world place across many elements (a road is dozens of
way fragments, a city is a node plus a boundary). Features of the same
type that share a normalized name and geometrically intersect are merged
into a single gazetteer feature via union-find over that relation; the
merged geometry keeps every part in a multi-geometry rather than
computing geometric unions, so display fidelity is preserved.

URIs are deterministic across rebuilds of identical input:
``feat:<type>/<slug>/<n>`` with the ordinal taken over same-slug features
ordered by their sorted source ids.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .geomodel import (
    BBox,
    GeoPoint,
    Geometry,
    LineString,
    LocationType,
    MultiLineString,
    MultiPoint,
    MultiPolygon,
    Point,
    Polygon,
    bbox_intersects,
    bbox_of,
    centroid,
    geometries_intersect,
    geometry_from_geojson,
    geometry_to_geojson,
)
from .osm_ingest import RawFeature
from .textnorm import normalize_name

FEATURES_FILE = "features.ndjson"
NAME_INDEX_FILE = "name_index.tsv"


class CorruptFile(Exception):
    """A gazetteer file that cannot be read back; carries the line number."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class GazetteerFeature:
    uri: str
    loc_type: LocationType
    primary_name: str
    all_names: frozenset[str]
    geometry: Geometry
    bbox: BBox
    source_ids: frozenset[tuple[str, int]]
    centroid: GeoPoint

    def normalized_names(self) -> set[str]:
        return {normalize_name(n) for n in self.all_names}

    def to_geojson(self) -> dict:
        alt = sorted(self.all_names - {self.primary_name})
        return {
            "type": "Feature",
            "geometry": geometry_to_geojson(self.geometry),
            "bbox": self.bbox.as_list(),
            "properties": {
                "uri": self.uri,
                "loc_type": self.loc_type.label,
                "primary_name": self.primary_name,
                "alt_names": alt,
                "source_ids": sorted([k, i] for k, i in self.source_ids),
            },
        }

    @classmethod
    def from_geojson(cls, obj: dict) -> "GazetteerFeature":
        props = obj["properties"]
        geometry = geometry_from_geojson(obj["geometry"])
        return cls(
            uri=props["uri"],
            loc_type=LocationType.from_label(props["loc_type"]),
            primary_name=props["primary_name"],
            all_names=frozenset([props["primary_name"], *props["alt_names"]]),
            geometry=geometry,
            bbox=bbox_of(geometry),
            source_ids=frozenset((k, int(i)) for k, i in props["source_ids"]),
            centroid=centroid(geometry),
        )


def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", normalize_name(name)).strip("-")
    return slug or "unnamed"


# ---------------------------------------------------------------------------
# merging


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:  # path compression
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _feature_names(feat: RawFeature) -> set[str]:
    return {normalize_name(n) for n in (feat.primary_name, *feat.alt_names) if normalize_name(n)}


def _geometry_parts(g: Geometry):
    """Split into atomic parts with a dimension tag (0/1/2)."""
    if isinstance(g, Point):
        return [(0, g.coord)]
    if isinstance(g, MultiPoint):
        return [(0, p) for p in g.points]
    if isinstance(g, LineString):
        return [(1, g)]
    if isinstance(g, MultiLineString):
        return [(1, line) for line in g.lines]
    if isinstance(g, Polygon):
        return [(2, g)]
    if isinstance(g, MultiPolygon):
        return [(2, p) for p in g.polygons]
    raise TypeError(f"not a geometry: {g!r}")


def _part_sort_key(dim: int, part):
    if dim == 0:
        return (part.lon, part.lat)
    if dim == 1:
        return tuple((p.lon, p.lat) for p in part.coords)
    return tuple((p.lon, p.lat) for p in part.outer)


def _combine_geometries(geometries: list[Geometry]) -> Geometry:
    """Concatenate into the smallest container; a mixed-dimension component
    keeps only its highest-dimension parts (the lower ones are redundant
    representations of the same place)."""
    parts = [p for g in geometries for p in _geometry_parts(g)]
    top = max(dim for dim, _ in parts)
    kept = sorted(
        (part for dim, part in parts if dim == top), key=lambda p: _part_sort_key(top, p)
    )
    if len(kept) == 1:
        return kept[0] if top else Point(kept[0])
    if top == 0:
        return MultiPoint(tuple(kept))
    if top == 1:
        return MultiLineString(tuple(kept))
    return MultiPolygon(tuple(kept))


def _pick_primary(names: list[str]) -> str:
    counts: dict[str, int] = {}
    for n in names:
        counts[n] = counts.get(n, 0) + 1
    return min(counts, key=lambda n: (-counts[n], n))


@dataclass
class _MergeGroup:
    """Working record during fixpoint merging; keeps the member features'
    original geometries so grown name sets can still witness intersections."""

    loc_type: LocationType
    norm_names: set[str]
    display_names: set[str]
    primaries: list[str]
    geometries: list[Geometry]
    bboxes: list[BBox]
    source_ids: set[tuple[str, int]]

    def intersects(self, other: "_MergeGroup") -> bool:
        for g, gb in zip(self.geometries, self.bboxes):
            for h, hb in zip(other.geometries, other.bboxes):
                if bbox_intersects(gb, hb) and geometries_intersect(g, h):
                    return True
        return False


def _merge_pass(groups: list[_MergeGroup]) -> tuple[list[_MergeGroup], bool]:
    uf = _UnionFind(len(groups))
    by_key: dict[tuple[LocationType, str], list[int]] = {}
    for i, grp in enumerate(groups):
        for name in grp.norm_names:
            by_key.setdefault((grp.loc_type, name), []).append(i)

    changed = False
    for bucket in by_key.values():
        for ai in range(len(bucket)):
            for bi in range(ai + 1, len(bucket)):
                a, b = bucket[ai], bucket[bi]
                if uf.find(a) != uf.find(b) and groups[a].intersects(groups[b]):
                    uf.union(a, b)
                    changed = True
    if not changed:
        return groups, False

    components: dict[int, list[int]] = {}
    for i in range(len(groups)):
        components.setdefault(uf.find(i), []).append(i)
    merged = []
    for members in components.values():
        parts = [groups[i] for i in members]
        merged.append(
            _MergeGroup(
                loc_type=parts[0].loc_type,
                norm_names=set().union(*(p.norm_names for p in parts)),
                display_names=set().union(*(p.display_names for p in parts)),
                primaries=[n for p in parts for n in p.primaries],
                geometries=[g for p in parts for g in p.geometries],
                bboxes=[b for p in parts for b in p.bboxes],
                source_ids=set().union(*(p.source_ids for p in parts)),
            )
        )
    return merged, True


def merge_features(raw: list[RawFeature]) -> list[GazetteerFeature]:
    """Collapse same-type, same-toponym, intersecting features.

    Merging iterates to a fixpoint: a merge unions the name sets, which
    can make further pairs satisfy the relation. The result never
    contains two features that are same-type, share a normalized name,
    and intersect. URIs are left empty; ``assign_uris`` fills them in.
    """
    groups = [
        _MergeGroup(
            loc_type=f.loc_type,
            norm_names=_feature_names(f),
            display_names={f.primary_name, *f.alt_names},
            primaries=[f.primary_name],
            geometries=[f.geometry],
            bboxes=[bbox_of(f.geometry)],
            source_ids=set(f.source_ids),
        )
        for f in raw
    ]
    changed = True
    while changed:
        groups, changed = _merge_pass(groups)

    merged = []
    for grp in groups:
        geometry = _combine_geometries(grp.geometries)
        merged.append(
            GazetteerFeature(
                uri="",
                loc_type=grp.loc_type,
                primary_name=_pick_primary(grp.primaries),
                all_names=frozenset(grp.display_names),
                geometry=geometry,
                bbox=bbox_of(geometry),
                source_ids=frozenset(grp.source_ids),
                centroid=centroid(geometry),
            )
        )
    merged.sort(key=lambda f: (f.loc_type.rank, f.primary_name, sorted(f.source_ids)))
    return merged


def assign_uris(features: list[GazetteerFeature]) -> list[GazetteerFeature]:
    """Fill in ``feat:<type>/<slug>/<n>`` URIs, deterministically.

    The ordinal is the feature's position among same (type, slug)
    features ordered by sorted source ids, so rebuilds of identical input
    produce identical URIs.
    """
    groups: dict[tuple[str, str], list[GazetteerFeature]] = {}
    for feat in features:
        key = (feat.loc_type.name.lower(), slugify(feat.primary_name))
        groups.setdefault(key, []).append(feat)

    uris: dict[int, str] = {}
    for (type_name, slug), members in groups.items():
        ordered = sorted(members, key=lambda f: sorted(f.source_ids))
        for ordinal, feat in enumerate(ordered):
            uris[id(feat)] = f"feat:{type_name}/{slug}/{ordinal}"

    out = [
        GazetteerFeature(
            uri=uris[id(f)],
            loc_type=f.loc_type,
            primary_name=f.primary_name,
            all_names=f.all_names,
            geometry=f.geometry,
            bbox=f.bbox,
            source_ids=f.source_ids,
            centroid=f.centroid,
        )
        for f in features
    ]
    out.sort(key=lambda f: (f.loc_type.rank, f.primary_name, f.uri))
    return out


# ---------------------------------------------------------------------------
# the gazetteer proper


class Gazetteer:
    """Immutable after construction: features by URI plus the name index."""

    def __init__(self, features: list[GazetteerFeature]):
        self._features: dict[str, GazetteerFeature] = {}
        self._index: dict[str, list[str]] = {}
        for feat in features:
            if not feat.uri:
                raise ValueError("gazetteer features need URIs; run assign_uris first")
            if feat.uri in self._features:
                raise ValueError(f"duplicate feature uri {feat.uri}")
            self._features[feat.uri] = feat
        for feat in features:
            for name in feat.normalized_names():
                uris = self._index.setdefault(name, [])
                if feat.uri not in uris:
                    uris.append(feat.uri)
        for uris in self._index.values():
            uris.sort()

    @classmethod
    def build(cls, raw: list[RawFeature]) -> "Gazetteer":
        return cls(assign_uris(merge_features(raw)))

    def __len__(self) -> int:
        return len(self._features)

    def __iter__(self):
        return iter(self._features.values())

    def get(self, uri: str) -> GazetteerFeature | None:
        return self._features.get(uri)

    def lookup(self, name: str) -> list[GazetteerFeature]:
        """All features known under ``name`` (case/diacritic-insensitive)."""
        uris = self._index.get(normalize_name(name), [])
        return [self._features[u] for u in uris]

    def names(self) -> list[str]:
        """Every normalized name in the index."""
        return list(self._index.keys())

    # -- persistence --------------------------------------------------------

    def save(self, directory) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / FEATURES_FILE, "w", encoding="utf-8") as fh:
            for feat in self._features.values():
                fh.write(json.dumps(feat.to_geojson(), ensure_ascii=False, sort_keys=True))
                fh.write("\n")
        with open(directory / NAME_INDEX_FILE, "w", encoding="utf-8") as fh:
            for name in sorted(self._index):
                fh.write(f"{name}\t{','.join(self._index[name])}\n")

    @classmethod
    def load(cls, directory) -> "Gazetteer":
        path = directory / FEATURES_FILE
        features = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    features.append(GazetteerFeature.from_geojson(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                    raise CorruptFile(path, line_no, str(exc)) from exc
        gaz = cls(features)
        index_path = directory / NAME_INDEX_FILE
        if index_path.exists():
            _verify_name_index(index_path, gaz)
        return gaz


def _verify_name_index(path, gaz: Gazetteer) -> None:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                name, uris = line.split("\t")
            except ValueError as exc:
                raise CorruptFile(path, line_no, "expected name<TAB>uris") from exc
            for uri in uris.split(","):
                if gaz.get(uri) is None:
                    raise CorruptFile(path, line_no, f"dangling uri {uri}")
