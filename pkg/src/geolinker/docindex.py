"""Document store with spatial, temporal, and facet filtering.

Annotated documents are indexed by the bounding boxes of their
annotations (an R-tree over every annotation of every document). A query
carries a map viewport, a zoom level that caps how fine-grained the
visible location types are, an optional inclusive date range, and
optional facet values. The timeline aggregation counts in-viewport
annotations per year, broken down by the documents' facet value.

Mutations must be serialized by the caller (single writer); reads of a
quiescent index are safe from any number of threads.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field

from .geomodel import Annotation, BBox, LocationType
from .rtree import RTree

DOCUMENTS_FILE = "documents.ndjson"

UNDATED_BIN = "undated"

# zoom -> coarsest-to-finest visibility: low zoom levels only show
# large features (countries), high zooms everything down to buildings
_ZOOM_RANK_STEPS = (
    (4, 0),
    (6, 1),
    (7, 2),
    (9, 3),
    (12, 4),
    (15, 5),
    (19, 6),
)


class DuplicateDocId(Exception):
    pass


class UnknownDocId(Exception):
    pass


def zoom_rank_cap(zoom: int) -> int:
    """Maximum visible LocationType rank for a slippy-map zoom level."""
    if not 0 <= zoom <= 19:
        raise ValueError(f"zoom out of range 0..19: {zoom}")
    for upper, rank in _ZOOM_RANK_STEPS:
        if zoom <= upper:
            return rank
    raise AssertionError("unreachable")


def uri_rank(uri: str) -> int:
    """LocationType rank encoded in a feature URI; unknown shapes get 6."""
    if uri.startswith("feat:"):
        type_name, _, _ = uri[5:].partition("/")
        try:
            return LocationType.from_label(type_name).rank
        except ValueError:
            pass
    return 6


@dataclass(frozen=True)
class IndexedDocument:
    doc_id: str
    text: str
    date: dt.date | None = None
    facet: str | None = None
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "annotations", tuple(self.annotations))
        for ann in self.annotations:
            if ann.span[1] > len(self.text):
                raise ValueError(
                    f"annotation span {ann.span} outside document {self.doc_id!r}"
                )

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "text": self.text,
            "date": self.date.isoformat() if self.date else None,
            "facet": self.facet,
            "annotations": [
                {
                    "feature_uri": a.feature_uri,
                    "span": list(a.span),
                    "confidence": a.confidence,
                    "bbox": a.bbox.as_list(),
                }
                for a in self.annotations
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IndexedDocument":
        return cls(
            doc_id=obj["doc_id"],
            text=obj["text"],
            date=dt.date.fromisoformat(obj["date"]) if obj.get("date") else None,
            facet=obj.get("facet"),
            annotations=tuple(
                Annotation(
                    feature_uri=a["feature_uri"],
                    span=(int(a["span"][0]), int(a["span"][1])),
                    confidence=float(a["confidence"]),
                    bbox=BBox.from_list(a["bbox"]),
                )
                for a in obj.get("annotations", ())
            ),
        )


@dataclass(frozen=True)
class SearchQuery:
    viewport: BBox
    zoom: int
    time_range: tuple[dt.date, dt.date] | None = None
    facets: frozenset[str] | None = None
    max_results: int = 50

    def __post_init__(self) -> None:
        if not 0 <= self.zoom <= 19:
            raise ValueError(f"zoom out of range 0..19: {self.zoom}")
        if self.time_range is not None and self.time_range[0] > self.time_range[1]:
            raise ValueError("time range start after end")
        if self.facets is not None:
            object.__setattr__(self, "facets", frozenset(self.facets))


@dataclass(frozen=True)
class DocumentHit:
    document: IndexedDocument
    annotations: tuple[Annotation, ...]

    @property
    def max_confidence(self) -> float:
        return max(a.confidence for a in self.annotations)


@dataclass(frozen=True)
class QueryResult:
    hits: tuple[DocumentHit, ...]
    total: int
    feature_uris: tuple[str, ...]


@dataclass(frozen=True)
class TimelineBin:
    period: str
    counts: dict[str, int]
    total: int


class DocumentIndex:
    def __init__(self):
        self._docs: dict[str, IndexedDocument] = {}
        self._tree = RTree()

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self):
        return iter(self._docs.values())

    def get(self, doc_id: str) -> IndexedDocument | None:
        return self._docs.get(doc_id)

    @property
    def rtree(self) -> RTree:
        return self._tree

    def add_document(self, doc: IndexedDocument) -> None:
        if doc.doc_id in self._docs:
            raise DuplicateDocId(doc.doc_id)
        self._docs[doc.doc_id] = doc
        for ordinal, ann in enumerate(doc.annotations):
            self._tree.insert(ann.bbox, (doc.doc_id, ordinal))

    def remove_document(self, doc_id: str) -> None:
        doc = self._docs.pop(doc_id, None)
        if doc is None:
            raise UnknownDocId(doc_id)
        for ordinal, ann in enumerate(doc.annotations):
            removed = self._tree.delete(ann.bbox, (doc_id, ordinal))
            assert removed, f"index out of sync for {doc_id}#{ordinal}"

    # -- queries -------------------------------------------------------------

    def _doc_passes(self, doc: IndexedDocument, query: SearchQuery) -> bool:
        if query.time_range is not None:
            if doc.date is None or not query.time_range[0] <= doc.date <= query.time_range[1]:
                return False
        if query.facets is not None and doc.facet not in query.facets:
            return False
        return True

    def _matched_annotations(self, query: SearchQuery) -> dict[str, list[Annotation]]:
        cap = zoom_rank_cap(query.zoom)
        per_doc: dict[str, list[int]] = {}
        for doc_id, ordinal in self._tree.search(query.viewport):
            ann = self._docs[doc_id].annotations[ordinal]
            if uri_rank(ann.feature_uri) <= cap:
                per_doc.setdefault(doc_id, []).append(ordinal)
        return {
            doc_id: [self._docs[doc_id].annotations[i] for i in sorted(ordinals)]
            for doc_id, ordinals in per_doc.items()
        }

    def query(self, query: SearchQuery) -> QueryResult:
        """Documents with at least one in-viewport, zoom-visible annotation,
        filtered by date and facet, ranked by their best annotation."""
        matched = self._matched_annotations(query)
        hits = [
            DocumentHit(document=self._docs[doc_id], annotations=tuple(anns))
            for doc_id, anns in matched.items()
            if self._doc_passes(self._docs[doc_id], query)
        ]
        hits.sort(key=lambda h: (-h.max_confidence, h.document.doc_id))
        uris = sorted({a.feature_uri for h in hits for a in h.annotations})
        return QueryResult(
            hits=tuple(hits[: query.max_results]),
            total=len(hits),
            feature_uris=tuple(uris),
        )

    def timeline(self, query: SearchQuery) -> list[TimelineBin]:
        """Yearly counts of matching annotations, grouped by document facet.

        The query's time range is ignored (the timeline always shows the
        whole corpus span); spatial, zoom, and facet filters apply.
        Documents without a date land in the "undated" bin, which is
        present whenever the corpus has any undated document.
        """
        if not self._docs:
            return []
        matched = self._matched_annotations(query)

        years = [doc.date.year for doc in self._docs.values() if doc.date is not None]
        periods = [str(y) for y in range(min(years), max(years) + 1)] if years else []
        if any(doc.date is None for doc in self._docs.values()):
            periods.append(UNDATED_BIN)

        bins = {p: TimelineBin(period=p, counts={}, total=0) for p in periods}
        totals = {p: 0 for p in periods}
        counts: dict[str, dict[str, int]] = {p: {} for p in periods}
        for doc_id, anns in matched.items():
            doc = self._docs[doc_id]
            if query.facets is not None and doc.facet not in query.facets:
                continue
            period = str(doc.date.year) if doc.date is not None else UNDATED_BIN
            totals[period] += len(anns)
            if doc.facet is not None:
                counts[period][doc.facet] = counts[period].get(doc.facet, 0) + len(anns)
        return [
            TimelineBin(period=p, counts=counts[p], total=totals[p]) for p in periods
        ]

    # -- persistence ---------------------------------------------------------

    def save(self, directory) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / DOCUMENTS_FILE, "w", encoding="utf-8") as fh:
            for doc_id in sorted(self._docs):
                fh.write(json.dumps(self._docs[doc_id].to_json(), ensure_ascii=False,
                                    sort_keys=True))
                fh.write("\n")

    @classmethod
    def load(cls, directory) -> "DocumentIndex":
        index = cls()
        with open(directory / DOCUMENTS_FILE, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    index.add_document(IndexedDocument.from_json(json.loads(line)))
        return index
