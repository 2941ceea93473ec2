"""Three-stage toponym resolution: NIL detection, location-type
classification over context windows, and collective spatial ranking."""

from .features import (
    FileKnowledgeProvider,
    FreqTable,
    KnowledgeProvider,
    NIL_FEATURE_DIM,
    WindowExample,
    build_freq_table,
    extract_window,
    nil_feature_vector,
    tokenize,
)
from .models import (
    DegenerateLabels,
    LinearModel,
    MaxEntModel,
    MissingClass,
    NaiveBayesModel,
    TypeModel,
    classify_type,
    load_nil_model,
    load_type_model,
    maxent_loss_grad,
    save_model,
    sigmoid,
    train_nil,
    train_type,
)
from .resolve import resolve
from .spatial import CandidateGraph, WalkResult, build_candidate_graph, random_walk_rank

__all__ = [
    "FileKnowledgeProvider",
    "FreqTable",
    "KnowledgeProvider",
    "NIL_FEATURE_DIM",
    "WindowExample",
    "build_freq_table",
    "extract_window",
    "nil_feature_vector",
    "tokenize",
    "DegenerateLabels",
    "LinearModel",
    "MaxEntModel",
    "MissingClass",
    "NaiveBayesModel",
    "TypeModel",
    "classify_type",
    "load_nil_model",
    "load_type_model",
    "maxent_loss_grad",
    "save_model",
    "sigmoid",
    "train_nil",
    "train_type",
    "resolve",
    "CandidateGraph",
    "WalkResult",
    "build_candidate_graph",
    "random_walk_rank",
]
