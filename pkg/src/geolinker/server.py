"""HTTP service: geo-referencing, viewport search, timeline, and feature
lookup, plus optional static serving of the built web UI.

Responses are serialized with stable key order and floats at 9
significant digits, so identical requests against identical state produce
byte-identical bodies. Error bodies are always ``{"error", "detail"}``.
"""

from __future__ import annotations

import datetime as dt
import json

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from .docindex import DocumentIndex, SearchQuery
from .gazetteer import Gazetteer
from .geomodel import BBox
from .pipeline import GeoReferencer

MAX_GEOREF_BODY = 1 << 20  # 1 MiB


def _stable(obj):
    """Round floats to 9 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _stable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stable(v) for v in obj]
    return obj


def stable_json(obj, status_code: int = 200) -> Response:
    body = json.dumps(_stable(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return Response(content=body, status_code=status_code, media_type="application/json")


class ApiError(Exception):
    def __init__(self, status_code: int, error: str, detail: str):
        self.status_code = status_code
        self.error = error
        self.detail = detail


def _parse_bbox(raw: str) -> BBox:
    parts = raw.split(",")
    if len(parts) != 4:
        raise ApiError(400, "bad_bbox", f"bbox needs 4 comma-separated numbers, got {raw!r}")
    try:
        return BBox.from_list([float(p) for p in parts])
    except ValueError as exc:
        raise ApiError(400, "bad_bbox", str(exc)) from exc


def _parse_date(raw: str, param: str) -> dt.date:
    try:
        return dt.date.fromisoformat(raw)
    except ValueError as exc:
        raise ApiError(400, "bad_date", f"{param}: {exc}") from exc


def _parse_zoom(raw: str) -> int:
    try:
        zoom = int(raw)
    except ValueError as exc:
        raise ApiError(400, "bad_zoom", f"zoom must be an integer, got {raw!r}") from exc
    if not 0 <= zoom <= 19:
        raise ApiError(400, "bad_zoom", f"zoom out of range 0..19: {zoom}")
    return zoom


def create_app(
    gazetteer: Gazetteer,
    referencer: GeoReferencer,
    index: DocumentIndex,
    static_dir=None,
) -> FastAPI:
    app = FastAPI(title="geolinker", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return stable_json({"error": exc.error, "detail": exc.detail}, exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError):
        return stable_json({"error": "bad_request", "detail": str(exc)}, 400)

    @app.post("/georef")
    async def georef(request: Request):
        body = await request.body()
        if len(body) > MAX_GEOREF_BODY:
            raise ApiError(413, "oversize", f"body exceeds {MAX_GEOREF_BODY} bytes")
        try:
            payload = json.loads(body.decode("utf-8")) if body else {}
        except UnicodeDecodeError as exc:
            raise ApiError(400, "bad_encoding", str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise ApiError(400, "bad_json", str(exc)) from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("text", ""), str):
            raise ApiError(400, "bad_request", 'expected {"text": "..."}')
        result = referencer.georef(payload.get("text", ""))
        return stable_json(result.to_json())

    def _query_from_params(params) -> SearchQuery:
        if "bbox" not in params:
            raise ApiError(400, "missing_param", "bbox is required")
        viewport = _parse_bbox(params["bbox"])
        zoom = _parse_zoom(params.get("zoom", "19"))
        time_range = None
        if "from" in params or "to" in params:
            start = _parse_date(params.get("from", "0001-01-01"), "from")
            end = _parse_date(params.get("to", "9999-12-31"), "to")
            if start > end:
                raise ApiError(400, "bad_date", "from is after to")
            time_range = (start, end)
        facets = frozenset(params.getlist("facet")) if params.getlist("facet") else None
        try:
            max_results = int(params.get("max_results", "50"))
        except ValueError as exc:
            raise ApiError(400, "bad_param", f"max_results: {exc}") from exc
        return SearchQuery(
            viewport=viewport,
            zoom=zoom,
            time_range=time_range,
            facets=facets,
            max_results=max_results,
        )

    @app.get("/search")
    async def search(request: Request):
        query = _query_from_params(request.query_params)
        result = index.query(query)
        features = []
        for uri in result.feature_uris:
            feat = gazetteer.get(uri)
            if feat is not None:
                features.append(feat.to_geojson())
        return stable_json(
            {
                "documents": [
                    {
                        "doc_id": hit.document.doc_id,
                        "date": hit.document.date.isoformat() if hit.document.date else None,
                        "facet": hit.document.facet,
                        "text": hit.document.text,
                        "max_confidence": hit.max_confidence,
                        "annotations": [
                            {
                                "feature_uri": a.feature_uri,
                                "span": list(a.span),
                                "confidence": a.confidence,
                                "bbox": a.bbox.as_list(),
                            }
                            for a in hit.annotations
                        ],
                    }
                    for hit in result.hits
                ],
                "features": features,
                "total": result.total,
            }
        )

    @app.get("/timeline")
    async def timeline(request: Request):
        params = request.query_params
        facet_key = params.get("facet_key", "facet")
        if facet_key != "facet":
            raise ApiError(400, "bad_param", f"unknown facet key {facet_key!r}")
        query = _query_from_params(params)
        bins = index.timeline(query)
        return stable_json(
            [{"period": b.period, "counts": b.counts, "total": b.total} for b in bins]
        )

    @app.get("/feature/{uri:path}")
    async def feature(uri: str):
        feat = gazetteer.get(uri)
        if feat is None:
            raise ApiError(404, "unknown_feature", uri)
        return stable_json(feat.to_geojson())

    @app.get("/health")
    async def health():
        return stable_json({"status": "ok", "features": len(gazetteer), "documents": len(index)})

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
