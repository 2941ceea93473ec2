"""Feature extraction for the disambiguation stages.

Covers the reference-corpus frequency table (how often each gazetteer
name occurs in a Wiktionary-style dump: frequent names are well-known
places or homographs of common words), the pluggable knowledge provider
(an offline stand-in for encyclopedic queries), the 8-dimensional NIL
feature vector, and the +/-5-token context windows used by the location
type classifier.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ..gazetteer import Gazetteer
from ..recognizer import Automaton, CandidateMention, boundary_matches
from ..textnorm import normalize_name, normalize_text

NIL_FEATURE_DIM = 8

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)

NUM_TOKEN = "<NUM>"


class FreqTable:
    """Occurrence counts of gazetteer names in a reference corpus.

    Keys are normalized names; a missing name counts as zero.
    """

    def __init__(self, counts: dict[str, int] | None = None):
        self._counts = {k: int(v) for k, v in (counts or {}).items() if int(v) > 0}

    def count(self, name: str) -> int:
        return self._counts.get(normalize_name(name), 0)

    def as_dict(self) -> dict[str, int]:
        return dict(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name in sorted(self._counts):
                fh.write(f"{name}\t{self._counts[name]}\n")

    @classmethod
    def load(cls, path) -> "FreqTable":
        counts: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    name, count = line.split("\t")
                    counts[name] = int(count)
                except ValueError as exc:
                    raise ValueError(f"{path}:{line_no}: expected name<TAB>count") from exc
        return cls(counts)


def build_freq_table(corpus_lines, automaton: Automaton) -> FreqTable:
    """Count word-boundary-aligned occurrences of every pattern.

    Raw per-pattern counts: overlapping and nested matches all count.
    The corpus is consumed line by line, so the table builds in constant
    memory; a multi-word name broken across a line break is not counted.
    """
    counts = np.zeros(len(automaton.patterns), dtype=np.int64)
    for line in corpus_lines:
        norm = normalize_text(line)
        if not norm.text:
            continue
        for _, _, pid in boundary_matches(automaton, norm):
            counts[pid] += 1
    return FreqTable(
        {automaton.patterns[i]: int(c) for i, c in enumerate(counts) if c > 0}
    )


class KnowledgeProvider:
    """Encyclopedic lookups for NIL features. The default knows nothing;
    the file-backed provider reads an offline TSV snapshot."""

    def has_page(self, name: str) -> bool:
        return False

    def is_ambiguous(self, name: str) -> bool:
        return False


class FileKnowledgeProvider(KnowledgeProvider):
    """TSV rows: name<TAB>has_page<TAB>is_ambiguous (0/1 flags)."""

    def __init__(self, entries: dict[str, tuple[bool, bool]]):
        self._entries = entries

    @classmethod
    def load(cls, path) -> "FileKnowledgeProvider":
        entries: dict[str, tuple[bool, bool]] = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{line_no}: expected name<TAB>flag<TAB>flag")
                entries[normalize_name(parts[0])] = (parts[1] == "1", parts[2] == "1")
        return cls(entries)

    def has_page(self, name: str) -> bool:
        return self._entries.get(normalize_name(name), (False, False))[0]

    def is_ambiguous(self, name: str) -> bool:
        return self._entries.get(normalize_name(name), (False, False))[1]


def nil_feature_vector(
    mention: CandidateMention,
    freq: FreqTable,
    gazetteer: Gazetteer,
    kb: KnowledgeProvider,
) -> np.ndarray:
    """The 8 raw NIL features; scaling to [0,1] lives in the trained model."""
    ranks = [
        feat.loc_type.rank
        for uri in mention.candidates
        if (feat := gazetteer.get(uri)) is not None
    ]
    name = mention.matched_name
    return np.array(
        [
            math.log1p(freq.count(name)),
            math.log1p(len(mention.candidates)),
            float(min(ranks)) if ranks else 6.0,
            float(len(name)),
            float(len(name.split(" "))),
            1.0 if mention.surface[:1].isupper() else 0.0,
            1.0 if kb.has_page(name) else 0.0,
            1.0 if kb.is_ambiguous(name) else 0.0,
        ],
        dtype=np.float64,
    )


# ---------------------------------------------------------------------------
# context windows


@dataclass(frozen=True)
class WindowExample:
    """Tokens around a toponym (never the toponym itself), for training
    and classifying location types."""

    before: tuple[str, ...]
    after: tuple[str, ...]
    label: str | None = None

    def bag(self) -> tuple[str, ...]:
        return self.before + self.after


def tokenize(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _window_token(token: str, gazetteer: Gazetteer | None) -> str:
    if token.isdigit():
        return NUM_TOKEN
    if gazetteer is not None:
        hits = gazetteer.lookup(token)
        if len(hits) == 1:
            return f"<LOC:{hits[0].loc_type.label}>"
    return normalize_name(token)


def extract_window(
    text: str,
    span: tuple[int, int],
    gazetteer: Gazetteer | None = None,
    width: int = 5,
) -> WindowExample:
    """Up to ``width`` tokens on each side of ``span``.

    Numeric tokens become <NUM>; tokens that are unambiguous toponyms
    (exactly one gazetteer feature) become <LOC:Type>; everything else is
    normalized. Windows truncate at text edges.
    """
    start, end = span
    tokens = tokenize(text)
    before = [t for t, _, te in tokens if te <= start][-width:]
    after = [t for t, ts, _ in tokens if ts >= end][:width]
    return WindowExample(
        before=tuple(_window_token(t, gazetteer) for t in before),
        after=tuple(_window_token(t, gazetteer) for t in after),
    )
