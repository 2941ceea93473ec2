"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line. Tolerances and budgets are pinned here, not configurable.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete.
"""

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import (
    FIXTURE_SENTENCE,
    FIXTURES,
    KERKSTRAAT_BBOX,
    KERKSTRAAT_SPAN,
    KERKSTRAAT_URI,
    build_pipeline,
)
from helpers import merge_fixture, oracle_merge, oracle_query, oracle_timeline, random_workload
from test_recognizer import gazetteer_of, naive_scan, random_lexicon, random_text


def _criterion(name, body):
    try:
        body()
    except BaseException:
        print(f"\n[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"\n[ACCEPTANCE] {name}: PASS")


# ---------------------------------------------------------------------------


def test_recognizer_oracle_equivalence():
    def body():
        from geolinker.recognizer import Automaton, detect

        started = time.perf_counter()
        rng = np.random.default_rng(2001)
        cases = 0
        while cases < 1000:
            lexicon = random_lexicon(rng, int(rng.integers(5, 51)))
            gaz = gazetteer_of(lexicon)
            auto = Automaton.build(gaz.names())
            for _ in range(25):
                if cases == 1000:
                    break
                text = random_text(rng, lexicon)
                got = [(m.span[0], m.span[1], m.matched_name) for m in detect(text, auto, gaz)]
                assert got == naive_scan(text, lexicon), text
                cases += 1
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"took {elapsed:.1f}s, budget 30s"

    _criterion("recognizer oracle equivalence (1000 cases, <30s)", body)


def test_spatial_index_oracle_equivalence():
    def body():
        import datetime as dt

        from geolinker.docindex import DocumentIndex, SearchQuery
        from geolinker.geomodel import BBox

        started = time.perf_counter()
        rng = np.random.default_rng(2002)
        docs = []
        total_annotations = 0
        while total_annotations < 1000:
            batch = random_workload(rng, 50)
            for doc in batch:
                room = 1000 - total_annotations
                if room <= 0:
                    break
                if len(doc.annotations) > room:
                    doc = type(doc)(
                        doc_id=doc.doc_id,
                        text=doc.text,
                        date=doc.date,
                        facet=doc.facet,
                        annotations=doc.annotations[:room],
                    )
                docs.append(doc)
                total_annotations += len(doc.annotations)
        # doc ids may repeat across batches; make them unique
        docs = [
            type(d)(doc_id=f"doc-{i:05d}", text=d.text, date=d.date, facet=d.facet,
                    annotations=d.annotations)
            for i, d in enumerate(docs)
        ]
        assert sum(len(d.annotations) for d in docs) == 1000

        index = DocumentIndex()
        for doc in docs:
            index.add_document(doc)
            index.rtree.validate()

        def random_query():
            w, s = rng.uniform(-12, 8, 2)
            time_range = None
            if rng.uniform() < 0.5:
                y0 = int(rng.integers(1976, 1991))
                y1 = int(rng.integers(y0, 1991))
                time_range = (dt.date(y0, 1, 1), dt.date(y1, 12, 31))
            facets = None
            if rng.uniform() < 0.4:
                k = int(rng.integers(1, 3))
                facets = frozenset(["red", "blue", "green"][:k])
            return SearchQuery(
                viewport=BBox(w, s, w + float(rng.uniform(0, 9)), s + float(rng.uniform(0, 9))),
                zoom=int(rng.integers(0, 20)),
                time_range=time_range,
                facets=facets,
                max_results=int(rng.integers(1, 60)),
            )

        def check(queries, population):
            for query in queries:
                hits, total, uris = oracle_query(population, query)
                result = index.query(query)
                assert [h.document.doc_id for h in result.hits] == [d.doc_id for d, _ in hits]
                assert [list(h.annotations) for h in result.hits] == [m for _, m in hits]
                assert result.total == total and list(result.feature_uris) == uris
                expected_bins = oracle_timeline(population, query)
                assert index.timeline(query) == expected_bins

        check([random_query() for _ in range(150)], docs)

        removed_ids = {docs[i].doc_id for i in rng.choice(len(docs), 80, replace=False)}
        for doc_id in sorted(removed_ids):
            index.remove_document(doc_id)
            index.rtree.validate()
        remaining = [d for d in docs if d.doc_id not in removed_ids]
        check([random_query() for _ in range(50)], remaining)

        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"took {elapsed:.1f}s, budget 60s"

    _criterion("spatial index oracle equivalence (1000 annotations, 200 queries, <60s)", body)


def test_random_walk_correctness():
    def body():
        from geolinker.disambiguator import CandidateGraph, random_walk_rank

        rng = np.random.default_rng(2003)
        for case in range(50):
            n = int(rng.integers(1, 7))
            weights = rng.uniform(0, 3, size=(n, n))
            weights[rng.uniform(size=(n, n)) < 0.35] = 0.0
            np.fill_diagonal(weights, 0.0)
            graph = CandidateGraph(
                nodes=[(i, f"feat:road/n{i}/0") for i in range(n)],
                weights=weights,
                restart=np.full(n, 1.0 / n),
            )
            result = random_walk_rank(graph, max_iters=200)
            # direct linear-system solution
            P = np.zeros_like(weights)
            for i in range(n):
                s = weights[i].sum()
                P[i] = graph.restart if s == 0 else weights[i] / s
            expected = np.linalg.solve(np.eye(n) - 0.85 * P.T, 0.15 * graph.restart)
            assert np.abs(result.scores - expected).sum() < 1e-8, f"case {case}"
            assert abs(result.scores.sum() - 1.0) < 1e-9
            assert (result.scores >= 0).all()

    _criterion("random-walk vs direct linear solve (50 graphs, 1e-8 L1)", body)


def test_classifier_numerics():
    def body():
        from geolinker.disambiguator import (
            WindowExample,
            classify_type,
            maxent_loss_grad,
            train_nil,
            train_type,
        )

        # MaxEnt gradient vs central finite differences at 10 random points
        rng = np.random.default_rng(2004)
        X = rng.integers(0, 3, size=(12, 6)).astype(np.float64)
        y = rng.integers(0, 3, size=12)
        h = 1e-5
        for _ in range(10):
            W = rng.normal(0, 1, size=(3, 6))
            b = rng.normal(0, 1, size=3)
            _, grad_w, grad_b = maxent_loss_grad(W, b, X, y, 1e-3)
            worst = 0.0
            for idx in np.ndindex(W.shape):
                Wp, Wm = W.copy(), W.copy()
                Wp[idx] += h
                Wm[idx] -= h
                num = (maxent_loss_grad(Wp, b, X, y, 1e-3)[0]
                       - maxent_loss_grad(Wm, b, X, y, 1e-3)[0]) / (2 * h)
                worst = max(worst, abs(num - grad_w[idx]))
            for i in range(3):
                bp, bm = b.copy(), b.copy()
                bp[i] += h
                bm[i] -= h
                num = (maxent_loss_grad(W, bp, X, y, 1e-3)[0]
                       - maxent_loss_grad(W, bm, X, y, 1e-3)[0]) / (2 * h)
                worst = max(worst, abs(num - grad_b[i]))
            assert worst < 1e-6, worst

        # NB posteriors on the 4-example fixture, hand-computed to 1e-12
        examples = [
            WindowExample(before=("street",), after=("busy",), label="Road"),
            WindowExample(before=("street",), after=(), label="Road"),
            WindowExample(before=("lake",), after=("deep",), label="Water"),
            WindowExample(before=("lake",), after=(), label="Water"),
        ]
        model = train_type(examples, variant="nb")
        probs = classify_type(WindowExample(before=("street",), after=()), model)
        assert abs(probs["Road"] - 36 / 83) < 1e-12
        assert abs(probs["Water"] - 12 / 83) < 1e-12

        # NIL trainer on a separable 20-point set
        cloud = []
        for i in range(20):
            base = np.full(8, 0.75 if i % 2 == 0 else 0.25)
            cloud.append((base + rng.uniform(-0.1, 0.1, 8), "place" if i % 2 == 0 else "nil"))
        nil_model = train_nil(cloud)
        assert all(nil_model.predict(x) == lbl for x, lbl in cloud)

    _criterion("classifier numerics (MaxEnt FD 1e-6, NB 1e-12, NIL 100%)", body)


def test_gazetteer_merge_properties():
    def body():
        from geolinker.gazetteer import merge_features
        from geolinker.geomodel import geometries_intersect

        feats, expected_count = merge_fixture()
        reference = merge_features(feats)
        assert len(reference) == expected_count
        ref_key = {(frozenset(f.all_names), frozenset(f.source_ids)) for f in reference}
        assert {frozenset(f.source_ids) for f in reference} == oracle_merge(feats)

        rng = np.random.default_rng(2005)
        for _ in range(100):
            perm = [feats[i] for i in rng.permutation(len(feats))]
            got = {(frozenset(f.all_names), frozenset(f.source_ids))
                   for f in merge_features(perm)}
            assert got == ref_key

        # idempotence
        from geolinker.osm_ingest import RawFeature

        as_raw = [
            RawFeature(
                source_ids=tuple(sorted(f.source_ids)),
                geometry=f.geometry,
                loc_type=f.loc_type,
                primary_name=f.primary_name,
                alt_names=tuple(sorted(f.all_names - {f.primary_name})),
            )
            for f in reference
        ]
        again = merge_features(as_raw)
        assert {frozenset(f.source_ids) for f in again} == {
            frozenset(f.source_ids) for f in reference
        }

        # source-id conservation
        assert {s for f in reference for s in f.source_ids} == {
            s for f in feats for s in f.source_ids
        }

        # no output pair satisfies the merge relation
        for i in range(len(reference)):
            for j in range(i + 1, len(reference)):
                a, b = reference[i], reference[j]
                if a.loc_type is b.loc_type and (a.normalized_names() & b.normalized_names()):
                    assert not geometries_intersect(a.geometry, b.geometry)

    _criterion("gazetteer merge properties (100 permutations, idempotence, conservation)", body)


# ---------------------------------------------------------------------------
# end-to-end + determinism


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _wait_for(url, timeout=30.0):
    import httpx

    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            response = httpx.get(url, timeout=2.0)
            if response.status_code == 200:
                return
        except httpx.HTTPError:
            pass
        time.sleep(0.2)
    raise TimeoutError(f"server at {url} never came up")


@pytest.fixture(scope="module")
def two_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("determinism")
    started = time.perf_counter()
    first = build_pipeline(root / "run1")
    build_seconds = time.perf_counter() - started
    second = build_pipeline(root / "run2")
    return first, second, build_seconds


def test_end_to_end_fixture(two_runs):
    def body():
        first, _, build_seconds = two_runs
        port = _free_port()
        proc = subprocess.Popen(
            [
                sys.executable, "-m", "geolinker.cli", "serve",
                "--gazetteer", str(first["gaz"]),
                "--index", str(first["index"]),
                "--models", str(first["models"]),
                "--port", str(port),
            ],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
        )
        try:
            import httpx

            serve_started = time.perf_counter()
            _wait_for(f"http://127.0.0.1:{port}/health")
            search = httpx.get(
                f"http://127.0.0.1:{port}/search",
                params={"bbox": "-180,-90,180,90", "zoom": 19, "max_results": 100},
            ).json()
            assert search["total"] == 20

            georef_url = f"http://127.0.0.1:{port}/georef"
            r1 = httpx.post(georef_url, json={"text": FIXTURE_SENTENCE})
            r2 = httpx.post(georef_url, json={"text": FIXTURE_SENTENCE})
            assert r1.status_code == 200
            assert r1.content == r2.content, "responses differ across identical requests"
            (annotation,) = r1.json()["annotations"]
            assert annotation["feature_uri"] == KERKSTRAAT_URI
            assert annotation["span"] == KERKSTRAAT_SPAN
            assert annotation["bbox"] == KERKSTRAAT_BBOX
            assert 0.0 < annotation["confidence"] <= 1.0

            elapsed = build_seconds + (time.perf_counter() - serve_started)
            assert elapsed < 60.0, f"pipeline+serve took {elapsed:.1f}s, budget 60s"
        finally:
            proc.terminate()
            proc.wait(timeout=10)

    _criterion("end-to-end fixture pipeline (<60s, exact annotation tuple)", body)


def test_determinism_across_runs(two_runs):
    def body():
        first, second, _ = two_runs
        compared = [
            ("gaz/features.ndjson", first["gaz"] / "features.ndjson",
             second["gaz"] / "features.ndjson"),
            ("gaz/name_index.tsv", first["gaz"] / "name_index.tsv",
             second["gaz"] / "name_index.tsv"),
            ("models/nil.json", first["models"] / "nil.json", second["models"] / "nil.json"),
            ("models/type.json", first["models"] / "type.json", second["models"] / "type.json"),
            ("models/freq.tsv", first["models"] / "freq.tsv", second["models"] / "freq.tsv"),
            ("annotated.jsonl", first["annotated"], second["annotated"]),
            ("index/documents.ndjson", first["index"] / "documents.ndjson",
             second["index"] / "documents.ndjson"),
        ]
        for label, a, b in compared:
            assert Path(a).read_bytes() == Path(b).read_bytes(), f"{label} differs"

        # /georef responses byte-identical across independently built stacks
        from fastapi.testclient import TestClient

        from geolinker.docindex import DocumentIndex
        from geolinker.pipeline import load_referencer
        from geolinker.server import create_app

        bodies = []
        for run in (first, second):
            referencer = load_referencer(run["gaz"], run["models"])
            index = DocumentIndex.load(run["index"])
            client = TestClient(create_app(referencer.gazetteer, referencer, index))
            for text in (FIXTURE_SENTENCE, "Amsterdam en Rotterdam", "niets", ""):
                bodies.append((text, client.post("/georef", json={"text": text}).content))
        half = len(bodies) // 2
        for (text_a, body_a), (_, body_b) in zip(bodies[:half], bodies[half:]):
            assert body_a == body_b, f"georef response for {text_a!r} differs between runs"

    _criterion("determinism across full pipeline runs (byte-identical artifacts)", body)
