"""End-to-end geo-referencing: detection through resolution, with the
per-stage trace that the debug UI and the annotate command expose.

One GeoReferencer instance bundles an immutable gazetteer, its automaton,
and the trained models; ``georef`` is a pure function of the input text,
so the HTTP handler and the batch annotator share identical behavior.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .disambiguator import (
    FileKnowledgeProvider,
    FreqTable,
    KnowledgeProvider,
    LinearModel,
    TypeModel,
    build_candidate_graph,
    classify_type,
    extract_window,
    load_nil_model,
    load_type_model,
    nil_feature_vector,
    random_walk_rank,
    resolve,
)
from .gazetteer import Gazetteer
from .geomodel import Annotation
from .recognizer import Automaton, CandidateMention, detect

NIL_MODEL_FILE = "nil.json"
TYPE_MODEL_FILE = "type.json"
FREQ_FILE = "freq.tsv"
KB_FILE = "kb.tsv"


@dataclass(frozen=True)
class PipelineConfig:
    tau_km: float = 50.0
    restart: float = 0.15
    walk_tol: float = 1e-9
    walk_max_iters: int = 100
    lexical_weight: float = 0.5
    nil_threshold: float = 0.5


@dataclass
class GeoRefResult:
    """Stage-by-stage trace plus the final annotations."""

    mentions: list[CandidateMention]
    annotations: list[Annotation]
    walk_iterations: int = 0
    walk_converged: bool = True

    def to_json(self) -> dict:
        return {
            "mentions": [
                {
                    "span": list(m.span),
                    "surface": m.surface,
                    "matched_name": m.matched_name,
                    "candidates": list(m.candidates),
                    "nil_score": m.nil_score,
                    "is_nil": m.is_nil,
                    "type_probs": m.type_probs,
                    "spatial_scores": m.spatial_scores,
                    "combined_scores": m.combined_scores,
                    "chosen_uri": m.chosen_uri,
                    "confidence": m.confidence,
                }
                for m in self.mentions
            ],
            "annotations": [
                {
                    "feature_uri": a.feature_uri,
                    "span": list(a.span),
                    "confidence": a.confidence,
                    "bbox": a.bbox.as_list(),
                }
                for a in self.annotations
            ],
            "walk": {
                "iterations": self.walk_iterations,
                "converged": self.walk_converged,
            },
        }


@dataclass
class GeoReferencer:
    gazetteer: Gazetteer
    nil_model: LinearModel
    type_model: TypeModel
    freq: FreqTable
    kb: KnowledgeProvider = field(default_factory=KnowledgeProvider)
    config: PipelineConfig = field(default_factory=PipelineConfig)
    automaton: Automaton = None

    def __post_init__(self) -> None:
        if self.automaton is None:
            self.automaton = Automaton.build(self.gazetteer.names())

    def georef(self, text: str) -> GeoRefResult:
        mentions = detect(text, self.automaton, self.gazetteer)
        if not mentions:
            return GeoRefResult(mentions=[], annotations=[])

        for mention in mentions:
            vec = nil_feature_vector(mention, self.freq, self.gazetteer, self.kb)
            mention.nil_score = self.nil_model.score(vec)
            mention.is_nil = mention.nil_score < self.config.nil_threshold
            window = extract_window(text, mention.span, self.gazetteer)
            mention.type_probs = classify_type(window, self.type_model)

        # every detected mention joins the graph, NIL or not, so the debug
        # trace carries spatial output for all candidates
        graph = build_candidate_graph(mentions, self.gazetteer, tau_km=self.config.tau_km)
        walk = random_walk_rank(
            graph,
            alpha=self.config.restart,
            tol=self.config.walk_tol,
            max_iters=self.config.walk_max_iters,
        )
        for (mention_idx, uri), score in walk.spatial_scores.items():
            mentions[mention_idx].spatial_scores[uri] = score

        annotations = resolve(
            mentions,
            self.gazetteer,
            lexical_weight=self.config.lexical_weight,
            nil_threshold=self.config.nil_threshold,
        )
        return GeoRefResult(
            mentions=mentions,
            annotations=annotations,
            walk_iterations=walk.iterations,
            walk_converged=walk.converged,
        )


def load_referencer(
    gazetteer_dir,
    models_dir,
    config: PipelineConfig | None = None,
) -> GeoReferencer:
    """Assemble a referencer from persisted gazetteer and model files."""
    gazetteer_dir = Path(gazetteer_dir)
    models_dir = Path(models_dir)
    gazetteer = Gazetteer.load(gazetteer_dir)
    nil_model = load_nil_model(models_dir / NIL_MODEL_FILE)
    type_model = load_type_model(models_dir / TYPE_MODEL_FILE)
    freq = FreqTable.load(models_dir / FREQ_FILE)
    kb_path = models_dir / KB_FILE
    kb = FileKnowledgeProvider.load(kb_path) if kb_path.exists() else KnowledgeProvider()
    return GeoReferencer(
        gazetteer=gazetteer,
        nil_model=nil_model,
        type_model=type_model,
        freq=freq,
        kb=kb,
        config=config or PipelineConfig(),
    )
