"""Toponym detection: an Aho-Corasick automaton over all gazetteer names.

The automaton is built once from the normalized name set (goto trie,
BFS failure links, outputs propagated along the failure chain) and then
flattened into dense numpy transition tables so the scan loop can run
through the numba kernel. Matching happens on the normalized shadow text;
reported spans always index the original text.

Raw automaton hits are substring hits, which would be absurd as toponyms
("Ee" inside "been"), so detection filters to word-boundary-aligned
matches and then reduces overlaps by leftmost-longest preference.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .gazetteer import Gazetteer
from .textnorm import NormalizedText, is_boundary, normalize_name, normalize_text


class EmptyLexicon(Exception):
    """Automaton construction needs at least one non-empty pattern."""


@dataclass
class CandidateMention:
    """A detected toponym span plus everything later stages attach to it.

    ``span`` is in codepoint offsets of the original text. ``candidates``
    holds feature URIs and is non-empty at creation; the disambiguation
    stages fill in the score fields.
    """

    span: tuple[int, int]
    surface: str
    matched_name: str
    candidates: list[str]
    nil_score: float | None = None
    is_nil: bool | None = None
    type_probs: dict[str, float] | None = None
    spatial_scores: dict[str, float] = field(default_factory=dict)
    combined_scores: dict[str, float] = field(default_factory=dict)
    chosen_uri: str | None = None
    confidence: float | None = None

    def __post_init__(self) -> None:
        start, end = self.span
        if not 0 <= start < end:
            raise ValueError(f"invalid mention span {self.span}")
        if not self.candidates:
            raise ValueError("mention created with no candidates")


class Automaton:
    """Immutable multi-pattern matcher over normalized names."""

    def __init__(self, patterns, delta, out_start, out_ids, charmap_cps):
        self.patterns: tuple[str, ...] = patterns
        self.pattern_lengths = np.array([len(p) for p in patterns], dtype=np.int32)
        self._delta = delta
        self._out_start = out_start
        self._out_ids = out_ids
        self._charmap_cps = charmap_cps  # sorted codepoints; code = index + 1

    @classmethod
    def build(cls, names) -> "Automaton":
        """Compile the name set; case/diacritic folding happens here.

        Construction is linear in total pattern length for the trie and
        failure links; the dense transition table adds states x alphabet,
        over the alphabet actually used by the patterns.
        """
        patterns = sorted({normalize_name(n) for n in names} - {""})
        if not patterns:
            raise EmptyLexicon("no usable patterns in the lexicon")

        alphabet = sorted({ch for p in patterns for ch in p})
        code_of = {ch: i + 1 for i, ch in enumerate(alphabet)}
        n_codes = len(alphabet) + 1

        # goto trie
        children: list[dict[int, int]] = [{}]
        outputs: list[list[int]] = [[]]
        for pid, pattern in enumerate(patterns):
            state = 0
            for ch in pattern:
                code = code_of[ch]
                nxt = children[state].get(code)
                if nxt is None:
                    children.append({})
                    outputs.append([])
                    nxt = len(children) - 1
                    children[state][code] = nxt
                state = nxt
            outputs[state].append(pid)

        # failure links by BFS, with output propagation and a dense
        # next-state table resolved as we go
        n_states = len(children)
        fail = [0] * n_states
        delta = np.zeros((n_states, n_codes), dtype=np.int32)
        queue = deque()
        for code, child in sorted(children[0].items()):
            delta[0, code] = child
            queue.append(child)
        while queue:
            state = queue.popleft()
            outputs[state] = outputs[state] + outputs[fail[state]]
            for code in range(1, n_codes):
                child = children[state].get(code)
                if child is None:
                    delta[state, code] = delta[fail[state], code]
                else:
                    fail[child] = delta[fail[state], code]
                    delta[state, code] = child
                    queue.append(child)

        out_start = np.zeros(n_states + 1, dtype=np.int32)
        for s in range(n_states):
            out_start[s + 1] = out_start[s] + len(outputs[s])
        out_ids = np.fromiter(
            (pid for s in range(n_states) for pid in outputs[s]),
            dtype=np.int32,
            count=int(out_start[-1]),
        )
        charmap_cps = np.array([ord(c) for c in alphabet], dtype=np.uint32)
        return cls(tuple(patterns), delta, out_start, out_ids, charmap_cps)

    @property
    def state_count(self) -> int:
        return self._delta.shape[0]

    def _encode(self, text: str) -> np.ndarray:
        if not text:
            return np.empty(0, dtype=np.int32)
        cps = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)
        idx = np.searchsorted(self._charmap_cps, cps)
        idx[idx == len(self._charmap_cps)] = 0
        hit = self._charmap_cps[idx] == cps
        return np.where(hit, idx + 1, 0).astype(np.int32)

    def scan(self, text: str) -> list[tuple[int, int, int]]:
        """All pattern occurrences in ``text`` as (start, end, pattern id)."""
        ends, pids = kernels.ac_scan(
            self._delta, self._out_start, self._out_ids, self._encode(text)
        )
        lengths = self.pattern_lengths[pids]
        return list(zip((ends - lengths).tolist(), ends.tolist(), pids.tolist()))


def boundary_matches(
    automaton: Automaton, norm: NormalizedText
) -> list[tuple[int, int, int]]:
    """Word-boundary-aligned matches as original-text spans.

    No overlap resolution: every aligned occurrence of every pattern is
    reported (the frequency builder wants raw per-pattern counts).
    """
    original = norm.original
    matches = []
    for nstart, nend, pid in automaton.scan(norm.text):
        ostart, oend = norm.original_span(nstart, nend)
        if is_boundary(original, ostart) and is_boundary(original, oend):
            matches.append((ostart, oend, pid))
    return matches


def leftmost_longest(matches: list[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
    """Reduce to a non-overlapping set, preferring earlier then longer spans."""
    chosen = []
    last_end = -1
    for start, end, pid in sorted(matches, key=lambda m: (m[0], m[0] - m[1])):
        if start >= last_end:
            chosen.append((start, end, pid))
            last_end = end
    return chosen


def detect(text: str, automaton: Automaton, gazetteer: Gazetteer) -> list[CandidateMention]:
    """Find gazetteer toponym mentions in ``text``, sorted by start offset."""
    norm = normalize_text(text)
    mentions = []
    for start, end, pid in leftmost_longest(boundary_matches(automaton, norm)):
        name = automaton.patterns[pid]
        candidates = [f.uri for f in gazetteer.lookup(name)]
        if not candidates:
            continue  # stale automaton built from a different gazetteer
        mentions.append(
            CandidateMention(
                span=(start, end),
                surface=text[start:end],
                matched_name=name,
                candidates=candidates,
            )
        )
    return mentions
