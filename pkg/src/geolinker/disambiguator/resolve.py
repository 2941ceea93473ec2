"""Final combination: per-candidate lexical and spatial scores become one
chosen feature per mention, with a calibrated confidence."""

from __future__ import annotations

from ..gazetteer import Gazetteer
from ..geomodel import Annotation
from ..recognizer import CandidateMention

DEFAULT_LEXICAL_WEIGHT = 0.5
DEFAULT_NIL_THRESHOLD = 0.5


def resolve(
    mentions: list[CandidateMention],
    gazetteer: Gazetteer,
    lexical_weight: float = DEFAULT_LEXICAL_WEIGHT,
    nil_threshold: float = DEFAULT_NIL_THRESHOLD,
) -> list[Annotation]:
    """Pick the best candidate per mention and emit annotations.

    A mention scoring below the NIL threshold is dropped from the output
    (it stays on the mention list for debug views). Per candidate the
    combined score is ``lw*lexical + (1-lw)*spatial`` where lexical is the
    type classifier's probability of the candidate's type; ties break
    toward the lexicographically smaller URI. Confidence multiplies the
    NIL score into the combined score, clamped to [0, 1].
    """
    annotations = []
    for idx, mention in enumerate(mentions):
        nil_score = mention.nil_score if mention.nil_score is not None else 1.0
        mention.is_nil = nil_score < nil_threshold
        type_probs = mention.type_probs or {}

        best_uri = None
        best_score = -1.0
        for uri in mention.candidates:
            feat = gazetteer.get(uri)
            if feat is None:
                continue
            lexical = type_probs.get(feat.loc_type.label, 0.0)
            spatial = mention.spatial_scores.get(uri, 0.0)
            combined = lexical_weight * lexical + (1.0 - lexical_weight) * spatial
            mention.combined_scores[uri] = combined
            if combined > best_score or (combined == best_score and uri < best_uri):
                best_uri, best_score = uri, combined

        if best_uri is None:
            mention.is_nil = True
            continue
        mention.chosen_uri = best_uri
        mention.confidence = min(1.0, max(0.0, nil_score * best_score))
        if mention.is_nil:
            continue
        annotations.append(
            Annotation(
                feature_uri=best_uri,
                span=mention.span,
                confidence=mention.confidence,
                bbox=gazetteer.get(best_uri).bbox,
            )
        )
    return annotations
