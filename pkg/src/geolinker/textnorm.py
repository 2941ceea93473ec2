"""Unicode normalization shared by the gazetteer and the recognizer.

Toponyms and documents are compared in a normalized space: case-folded,
diacritics stripped (NFD decomposition, combining marks removed), and
whitespace runs collapsed to a single space. Documents additionally keep
a per-character map back into the original text, so matches found on the
normalized shadow text can be reported as stand-off spans into the
unmodified input.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_WORD_RE = re.compile(r"\w", re.UNICODE)


def is_word_char(ch: str) -> bool:
    return bool(_WORD_RE.match(ch))


def _folded_chars(text: str):
    """Yield (normalized char, original index) pairs, diacritics dropped.

    Case folding may expand a character ('ß' -> 'ss'); every expanded char
    maps back to the original index of the character it came from.
    """
    for i, ch in enumerate(text):
        for folded in ch.casefold():
            for part in unicodedata.normalize("NFD", folded):
                if not unicodedata.combining(part):
                    yield part, i


@dataclass(frozen=True)
class NormalizedText:
    """A normalized shadow text with offsets back into the original.

    ``starts[k]``/``ends[k]`` give the half-open original-codepoint span
    covered by normalized character ``k``. A match on ``[s, e)`` of the
    shadow text therefore covers ``[starts[s], ends[e - 1])`` of the
    original.
    """

    original: str
    text: str
    starts: tuple[int, ...]
    ends: tuple[int, ...]

    def original_span(self, start: int, end: int) -> tuple[int, int]:
        if not 0 <= start < end <= len(self.text):
            raise IndexError(f"span ({start}, {end}) outside normalized text")
        return self.starts[start], self.ends[end - 1]


def normalize_text(text: str) -> NormalizedText:
    """Build the normalized shadow of ``text`` with an offset map.

    Whitespace runs collapse to one space; leading and trailing runs are
    dropped entirely. The emitted space is mapped to the whole run it
    replaced.
    """
    chars: list[str] = []
    starts: list[int] = []
    ends: list[int] = []
    ws_start: int | None = None
    ws_end = 0
    for part, i in _folded_chars(text):
        if part.isspace():
            if ws_start is None:
                ws_start = i
            ws_end = i + 1
            continue
        if ws_start is not None:
            if chars:  # leading whitespace is dropped, not collapsed
                chars.append(" ")
                starts.append(ws_start)
                ends.append(ws_end)
            ws_start = None
        chars.append(part)
        starts.append(i)
        ends.append(i + 1)
    return NormalizedText(text, "".join(chars), tuple(starts), tuple(ends))


def normalize_name(name: str) -> str:
    """Normalize a toponym the same way document text is normalized."""
    return normalize_text(name).text


def is_boundary(text: str, pos: int) -> bool:
    """True when ``pos`` is a word boundary in ``text``.

    A position separates two word characters only when it sits inside a
    word; everything else (text edges, punctuation, whitespace on either
    side) counts as a boundary.
    """
    if pos <= 0 or pos >= len(text):
        return True
    return not (is_word_char(text[pos - 1]) and is_word_char(text[pos]))
