"""Shared fixture builders and independent oracles used across test modules."""

from geolinker.geomodel import (
    GeoPoint,
    LineString,
    LocationType,
    Point,
    Polygon,
    geometries_intersect,
)
from geolinker.osm_ingest import RawFeature
from geolinker.textnorm import normalize_name

_next_id = [1]


def _sid():
    _next_id[0] += 1
    return (("way", _next_id[0]),)


def road(name, coords, alt=()):
    return RawFeature(
        source_ids=_sid(),
        geometry=LineString(tuple(GeoPoint(x, y) for x, y in coords)),
        loc_type=LocationType.ROAD,
        primary_name=name,
        alt_names=tuple(alt),
    )


def area(name, loc_type, x0, y0, x1, y1, alt=()):
    ring = (
        GeoPoint(x0, y0),
        GeoPoint(x1, y0),
        GeoPoint(x1, y1),
        GeoPoint(x0, y1),
        GeoPoint(x0, y0),
    )
    return RawFeature(
        source_ids=_sid(),
        geometry=Polygon(ring),
        loc_type=loc_type,
        primary_name=name,
        alt_names=tuple(alt),
    )


def spot(name, loc_type, x, y, alt=()):
    return RawFeature(
        source_ids=_sid(),
        geometry=Point(GeoPoint(x, y)),
        loc_type=loc_type,
        primary_name=name,
        alt_names=tuple(alt),
    )


def merge_fixture():
    """Deterministic 50-feature set exercising every merge rule.

    Returns (features, expected_component_count).
    """
    _next_id[0] = 100
    T = LocationType
    feats = []
    # three 3-fragment road chains: a-b touch, b-c touch, a-c apart
    for bx in (0, 10, 20):
        feats.append(road("Ringweg", [(bx, 0), (bx + 1, 0)]))
        feats.append(road("Ringweg", [(bx + 1, 0), (bx + 2, 0)]))
        feats.append(road("Ringweg", [(bx + 2, 0), (bx + 2, 1)]))
    # five disjoint same-name roads stay apart
    for bx in (0, 10, 20, 30, 40):
        feats.append(road("Kerkstraat", [(bx, 10), (bx + 1, 10)]))
    # municipality node inside its boundary polygon merges (mixed dims)
    feats.append(area("Bergen", T.MUNICIPALITY, 0, 20, 2, 22))
    feats.append(spot("Bergen", T.MUNICIPALITY, 1, 21))
    feats.append(area("Bergen", T.MUNICIPALITY, 10, 20, 12, 22))  # disjoint namesake
    # same name, different type: never merged
    feats.append(road("Springfield", [(20, 20), (22, 22)]))
    feats.append(area("Springfield", T.MUNICIPALITY, 20, 20, 22, 22))
    # alternate-name bridge
    feats.append(road("Hoofdstraat", [(30, 20), (31, 20)], alt=["N1"]))
    feats.append(road("N1", [(31, 20), (32, 20)]))
    # fixpoint case: c shares a name only with the already-merged group
    feats.append(road("Ring", [(40, 20), (41, 20)], alt=["A1"]))
    feats.append(road("A1", [(41, 20), (42, 20)], alt=["B2"]))
    feats.append(road("B2", [(40, 20), (40, 21)]))
    # overlapping water pair + three disjoint ponds
    feats.append(area("Grote Plas", T.WATER, 0, 30, 2, 32))
    feats.append(area("Grote Plas", T.WATER, 1, 31, 3, 33))
    for bx in (10, 20, 30):
        feats.append(area("Vijver", T.WATER, bx, 30, bx + 1, 31))
    # disjoint buildings and neighborhoods
    for bx in (0, 10, 20, 30):
        feats.append(area("Stadhuis", T.BUILDING, bx, 40, bx + 0.5, 40.5))
    for bx in (10, 20, 30, 40):
        feats.append(spot("Centrum", T.NEIGHBORHOOD, bx, 45))
    # province duplicate pair and a country
    feats.append(area("Flevoland", T.PROVINCE, 40, 30, 44, 34))
    feats.append(area("Flevoland", T.PROVINCE, 42, 32, 46, 36))
    feats.append(area("Nederland", T.COUNTRY, 45, 45, 49, 49))
    for bx in (0, 10, 20, 30, 40):
        feats.append(road("Dorpsstraat", [(bx, 50), (bx + 1, 50)]))
    for bx in (0, 10, 20, 30, 40):
        feats.append(area("Molen", T.BUILDING, bx, 55, bx + 0.25, 55.25))
    assert len(feats) == 50
    return feats, 38


def oracle_merge(raw):
    """Repeated pairwise merging until fixpoint; independent of union-find.

    Returns the set of merged components, each a frozenset of source ids.
    """
    groups = [
        {
            "type": f.loc_type,
            "names": {normalize_name(n) for n in (f.primary_name, *f.alt_names)},
            "geoms": [f.geometry],
            "ids": set(f.source_ids),
        }
        for f in raw
    ]

    def mergeable(a, b):
        if a["type"] is not b["type"] or not (a["names"] & b["names"]):
            return False
        return any(geometries_intersect(g, h) for g in a["geoms"] for h in b["geoms"])

    changed = True
    while changed:
        changed = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if mergeable(groups[i], groups[j]):
                    groups[i]["names"] |= groups[j]["names"]
                    groups[i]["geoms"] += groups[j]["geoms"]
                    groups[i]["ids"] |= groups[j]["ids"]
                    del groups[j]
                    changed = True
                    break
            if changed:
                break
    return {frozenset(g["ids"]) for g in groups}


# ---------------------------------------------------------------------------
# document-index workloads and linear-scan oracles

import datetime as dt

from geolinker.docindex import IndexedDocument, TimelineBin
from geolinker.geomodel import Annotation, BBox

_URI_TYPES = [
    "country", "province", "water", "municipality", "neighborhood", "road", "building",
]
_RANK_OF = {name: i for i, name in enumerate(_URI_TYPES)}
FACETS = ["red", "blue", "green"]


def random_workload(rng, n_docs):
    docs = []
    for d in range(n_docs):
        n_anns = int(rng.integers(0, 6))
        anns = []
        for a in range(n_anns):
            w, s = rng.uniform(-10, 8, 2)
            kind = _URI_TYPES[int(rng.integers(0, 7))]
            anns.append(
                Annotation(
                    feature_uri=f"feat:{kind}/x{d}-{a}/0",
                    span=(a, a + 1),
                    confidence=float(rng.uniform(0, 1)),
                    bbox=BBox(w, s, w + float(rng.uniform(0, 4)), s + float(rng.uniform(0, 4))),
                )
            )
        date = None if rng.uniform() < 0.2 else dt.date(int(rng.integers(1976, 1991)), 1, 1)
        facet = None if rng.uniform() < 0.3 else FACETS[int(rng.integers(0, 3))]
        docs.append(
            IndexedDocument(
                doc_id=f"doc-{d:04d}",
                text="x" * 10,
                date=date,
                facet=facet,
                annotations=tuple(anns),
            )
        )
    return docs


def _boxes_overlap(a, b):
    return a.west <= b.east and b.west <= a.east and a.south <= b.north and b.south <= a.north


def _oracle_rank(uri):
    return _RANK_OF.get(uri[5:].split("/", 1)[0], 6)


def _oracle_cap(zoom):
    for upper, rank in ((4, 0), (6, 1), (7, 2), (9, 3), (12, 4), (15, 5), (19, 6)):
        if zoom <= upper:
            return rank


def oracle_query(docs, query):
    """Brute-force scan applying the documented predicate."""
    cap = _oracle_cap(query.zoom)
    hits = []
    for doc in docs:
        if query.time_range is not None:
            if doc.date is None or not query.time_range[0] <= doc.date <= query.time_range[1]:
                continue
        if query.facets is not None and doc.facet not in query.facets:
            continue
        matched = [
            ann
            for ann in doc.annotations
            if _boxes_overlap(ann.bbox, query.viewport) and _oracle_rank(ann.feature_uri) <= cap
        ]
        if matched:
            hits.append((doc, matched))
    hits.sort(key=lambda h: (-max(a.confidence for a in h[1]), h[0].doc_id))
    uris = sorted({a.feature_uri for _, m in hits for a in m})
    return hits[: query.max_results], len(hits), uris


def oracle_timeline(docs, query):
    """Brute-force group-by over years and facets."""
    if not docs:
        return []
    cap = _oracle_cap(query.zoom)
    years = [d.date.year for d in docs if d.date is not None]
    periods = [str(y) for y in range(min(years), max(years) + 1)] if years else []
    if any(d.date is None for d in docs):
        periods.append("undated")
    totals = {p: 0 for p in periods}
    counts = {p: {} for p in periods}
    for doc in docs:
        if query.facets is not None and doc.facet not in query.facets:
            continue
        matched = [
            ann
            for ann in doc.annotations
            if _boxes_overlap(ann.bbox, query.viewport) and _oracle_rank(ann.feature_uri) <= cap
        ]
        if not matched:
            continue
        period = str(doc.date.year) if doc.date is not None else "undated"
        totals[period] += len(matched)
        if doc.facet is not None:
            counts[period][doc.facet] = counts[period].get(doc.facet, 0) + len(matched)
    return [TimelineBin(period=p, counts=counts[p], total=totals[p]) for p in periods]
