"""Shared fixtures: the toy pipeline built once per session via the CLI."""

from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FIXTURE_SENTENCE = "De Kerkstraat is vandaag afgesloten."
KERKSTRAAT_URI = "feat:road/kerkstraat/0"
KERKSTRAAT_SPAN = [3, 13]
KERKSTRAAT_BBOX = [4.888, 52.365, 4.896, 52.366]


def run_cli(*argv) -> int:
    from geolinker.cli import main

    return main([str(a) for a in argv])


def build_pipeline(root: Path) -> dict:
    """Drive the full toy pipeline; returns the artifact paths."""
    paths = {
        "gaz": root / "gaz",
        "models": root / "models",
        "annotated": root / "annotated.jsonl",
        "index": root / "index",
    }
    assert run_cli("build-gazetteer", "--osm", FIXTURES / "fixture.osm", "--out", paths["gaz"]) == 0
    assert (
        run_cli(
            "build-freq",
            "--corpus", FIXTURES / "wiktionary.txt",
            "--gazetteer", paths["gaz"],
            "--out", paths["models"] / "freq.tsv",
        )
        == 0
    )
    assert (
        run_cli(
            "train", "--task", "nil",
            "--data", FIXTURES / "nil_train.csv",
            "--out", paths["models"] / "nil.json",
            "--seed", 13,
        )
        == 0
    )
    assert (
        run_cli(
            "train", "--task", "type",
            "--data", FIXTURES / "type_train.csv",
            "--out", paths["models"] / "type.json",
        )
        == 0
    )
    (paths["models"] / "kb.tsv").write_bytes((FIXTURES / "kb.tsv").read_bytes())
    assert (
        run_cli(
            "annotate",
            "--gazetteer", paths["gaz"],
            "--models", paths["models"],
            "--in", FIXTURES / "corpus.jsonl",
            "--out", paths["annotated"],
        )
        == 0
    )
    assert run_cli("index", "--in", paths["annotated"], "--out", paths["index"]) == 0
    return paths


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    return build_pipeline(root)


@pytest.fixture(scope="session")
def referencer(pipeline):
    from geolinker.pipeline import load_referencer

    return load_referencer(pipeline["gaz"], pipeline["models"])


@pytest.fixture(scope="session")
def doc_index(pipeline):
    from geolinker.docindex import DocumentIndex

    return DocumentIndex.load(pipeline["index"])
