"""Command line driving the whole pipeline: gazetteer build, frequency
table build, model training, corpus annotation, indexing, and serving.

Every verb exits 0 on success and nonzero with a diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import os
import sys
from pathlib import Path

from .disambiguator import (
    WindowExample,
    build_freq_table,
    save_model,
    train_nil,
    train_type,
)
from .docindex import DocumentIndex, IndexedDocument
from .gazetteer import Gazetteer
from .geomodel import Annotation, BBox
from .osm_ingest import denormalize, parse_osm_xml
from .pipeline import (
    FREQ_FILE,
    NIL_MODEL_FILE,
    TYPE_MODEL_FILE,
    PipelineConfig,
    load_referencer,
)
from .recognizer import Automaton

log = logging.getLogger("geolinker")


def _read_documents(path):
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                docs.append(obj)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: bad JSON: {exc}") from exc
    return docs


def cmd_build_gazetteer(args) -> int:
    with open(args.osm, "rb") as fh:
        elements = parse_osm_xml(fh)
    features = denormalize(elements)
    gazetteer = Gazetteer.build(features)
    gazetteer.save(Path(args.out))
    print(f"gazetteer: {len(gazetteer)} features from {len(elements)} OSM elements")
    return 0


def cmd_build_freq(args) -> int:
    gazetteer = Gazetteer.load(Path(args.gazetteer))
    automaton = Automaton.build(gazetteer.names())
    with open(args.corpus, encoding="utf-8") as fh:
        table = build_freq_table(fh, automaton)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    table.save(args.out)
    print(f"frequency table: {len(table)} names with nonzero counts")
    return 0


def _train_nil_from_csv(path, seed):
    examples = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 9:
            raise ValueError(f"{path}: expected 8 feature columns + label, got {len(header)}")
        for row in reader:
            if not row:
                continue
            examples.append(([float(v) for v in row[:8]], row[8].strip()))
    return train_nil(examples, seed=seed)


def _train_type_from_csv(path, variant):
    examples = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            examples.append(
                WindowExample(
                    before=tuple(row["before"].split()),
                    after=tuple(row["after"].split()),
                    label=row["label"].strip(),
                )
            )
    return train_type(examples, variant=variant)


def cmd_train(args) -> int:
    if args.task == "nil":
        model = _train_nil_from_csv(args.data, seed=args.seed)
    else:
        model = _train_type_from_csv(args.data, variant=args.variant)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.out)
    print(f"{args.task} model written to {args.out}")
    return 0


def _annotate_documents(referencer, raw_docs):
    for obj in raw_docs:
        result = referencer.georef(obj.get("text", ""))
        obj = dict(obj)
        obj["annotations"] = [
            {
                "feature_uri": a.feature_uri,
                "span": list(a.span),
                "confidence": a.confidence,
                "bbox": a.bbox.as_list(),
            }
            for a in result.annotations
        ]
        yield obj


def cmd_annotate(args) -> int:
    referencer = load_referencer(args.gazetteer, args.models, _config_from(args))
    raw_docs = _read_documents(args.infile)
    with open(args.out, "w", encoding="utf-8") as fh:
        for obj in _annotate_documents(referencer, raw_docs):
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
    print(f"annotated {len(raw_docs)} documents")
    return 0


def cmd_index(args) -> int:
    index = DocumentIndex()
    for obj in _read_documents(args.infile):
        annotations = tuple(
            Annotation(
                feature_uri=a["feature_uri"],
                span=(int(a["span"][0]), int(a["span"][1])),
                confidence=float(a["confidence"]),
                bbox=BBox.from_list(a["bbox"]),
            )
            for a in obj.get("annotations", ())
        )
        index.add_document(
            IndexedDocument(
                doc_id=str(obj["doc_id"]),
                text=obj.get("text", ""),
                date=dt.date.fromisoformat(obj["date"]) if obj.get("date") else None,
                facet=obj.get("facet"),
                annotations=annotations,
            )
        )
    index.save(Path(args.out))
    print(f"indexed {len(index)} documents")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    referencer = load_referencer(args.gazetteer, args.models, _config_from(args))
    index = DocumentIndex.load(Path(args.index))
    static_dir = Path(args.static) if args.static else None
    if static_dir is not None and not static_dir.is_dir():
        raise FileNotFoundError(f"static dir not found: {static_dir}")
    app = create_app(referencer.gazetteer, referencer, index, static_dir=static_dir)
    port = args.port if args.port is not None else int(os.environ.get("GEOLINKER_PORT", "8000"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def _config_from(args) -> PipelineConfig:
    defaults = PipelineConfig()
    return PipelineConfig(
        tau_km=getattr(args, "tau", None) or defaults.tau_km,
        lexical_weight=(
            args.lexical_weight if getattr(args, "lexical_weight", None) is not None
            else defaults.lexical_weight
        ),
        nil_threshold=(
            args.nil_threshold if getattr(args, "nil_threshold", None) is not None
            else defaults.nil_threshold
        ),
    )


def _add_pipeline_options(sub):
    sub.add_argument("--tau", type=float, help="distance decay scale in km (default 50)")
    sub.add_argument(
        "--lexical-weight",
        dest="lexical_weight",
        type=float,
        help="weight of the type classifier vs the spatial score (default 0.5)",
    )
    sub.add_argument(
        "--nil-threshold",
        dest="nil_threshold",
        type=float,
        help="NIL score below which mentions are dropped (default 0.5)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geolinker")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("build-gazetteer", help="OSM XML snapshot -> gazetteer directory")
    sub.add_argument("--osm", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_build_gazetteer)

    sub = commands.add_parser("build-freq", help="count gazetteer names in a reference corpus")
    sub.add_argument("--corpus", required=True)
    sub.add_argument("--gazetteer", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_build_freq)

    sub = commands.add_parser("train", help="train the NIL or type classifier from CSV")
    sub.add_argument("--task", choices=["nil", "type"], required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--seed", type=int, default=13)
    sub.add_argument("--variant", choices=["nb", "maxent"], default="nb")
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("annotate", help="geo-reference a JSON-lines corpus")
    sub.add_argument("--gazetteer", required=True)
    sub.add_argument("--models", required=True)
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--out", required=True)
    _add_pipeline_options(sub)
    sub.set_defaults(func=cmd_annotate)

    sub = commands.add_parser("index", help="build the spatial document index")
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_index)

    sub = commands.add_parser("serve", help="run the HTTP service")
    sub.add_argument("--gazetteer", required=True)
    sub.add_argument("--index", required=True)
    sub.add_argument("--models", required=True)
    sub.add_argument("--port", type=int, default=None,
                     help="default: $GEOLINKER_PORT or 8000")
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--static", help="directory of built web UI assets to serve at /")
    _add_pipeline_options(sub)
    sub.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - any failure is a diagnostic + exit 1
        print(f"geolinker {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
