"""Collective spatial ranking: a restart random walk over the candidate graph.

Near things are more related than distant things, so candidates of
different mentions are connected with weights that decay exponentially in
the great-circle distance between their centroids. Candidates of the same
mention are mutually exclusive readings and get zero weight between them.
The walk's stationary distribution, renormalized within each mention,
becomes the spatial score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..gazetteer import Gazetteer
from ..recognizer import CandidateMention

DEFAULT_TAU_KM = 50.0
DEFAULT_RESTART = 0.15
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 100


@dataclass
class CandidateGraph:
    """Nodes are (mention index, feature URI) pairs; weights are dense."""

    nodes: list[tuple[int, str]]
    weights: np.ndarray
    restart: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if n == 0:
            raise ValueError("candidate graph needs at least one node")
        if self.weights.shape != (n, n):
            raise ValueError("weight matrix shape mismatch")
        if not np.isfinite(self.weights).all() or (self.weights < 0).any():
            raise ValueError("weights must be finite and non-negative")


def build_candidate_graph(
    mentions: list[CandidateMention],
    gazetteer: Gazetteer,
    tau_km: float = DEFAULT_TAU_KM,
) -> CandidateGraph:
    """Fully-connected across mentions: w = exp(-distance/tau).

    Zero distance gives weight 1; same-mention pairs (including the
    diagonal) get weight 0. The restart distribution is uniform.
    """
    nodes = [(i, uri) for i, m in enumerate(mentions) for uri in m.candidates]
    if not nodes:
        raise ValueError("no candidates to rank")
    lons = np.empty(len(nodes))
    lats = np.empty(len(nodes))
    for k, (_, uri) in enumerate(nodes):
        feat = gazetteer.get(uri)
        if feat is None:
            raise KeyError(f"candidate uri not in gazetteer: {uri}")
        lons[k] = feat.centroid.lon
        lats[k] = feat.centroid.lat
    weights = np.exp(-kernels.haversine_matrix(lons, lats) / tau_km)
    mention_of = np.array([i for i, _ in nodes])
    same = mention_of[:, None] == mention_of[None, :]
    weights[same] = 0.0
    restart = np.full(len(nodes), 1.0 / len(nodes))
    return CandidateGraph(nodes=nodes, weights=weights, restart=restart)


@dataclass
class WalkResult:
    scores: np.ndarray
    iterations: int
    converged: bool
    spatial_scores: dict[tuple[int, str], float]


def random_walk_rank(
    graph: CandidateGraph,
    alpha: float = DEFAULT_RESTART,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> WalkResult:
    """Power-iterate p <- alpha*r + (1-alpha)*P'p to its fixed point.

    Rows with zero out-weight redistribute to the restart vector. The
    result is a probability distribution over nodes; per-mention
    renormalization yields each candidate's spatial score. On hitting
    ``max_iters`` the last iterate is returned with ``converged=False``.
    """
    p, iters, converged = kernels.stationary_distribution(
        graph.weights, graph.restart, alpha, tol, max_iters
    )
    per_mention_total: dict[int, float] = {}
    for (mention_idx, _), score in zip(graph.nodes, p):
        per_mention_total[mention_idx] = per_mention_total.get(mention_idx, 0.0) + float(score)
    spatial = {
        (mention_idx, uri): float(score) / per_mention_total[mention_idx]
        for (mention_idx, uri), score in zip(graph.nodes, p)
    }
    return WalkResult(scores=p, iterations=iters, converged=converged, spatial_scores=spatial)
