"""Fuzzy mapping of free-typed names onto the menu vocabulary.

The default similarity is normalized edit distance over case-folded,
punctuation-stripped text; an embedding client can be plugged in for
cosine similarity, with automatic fallback to edit distance when the
client fails.  A corrector only ever returns exact vocabulary members.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = ["NameCorrector", "levenshtein", "similarity"]

_CLEAN = re.compile(r"[^a-z0-9 ]+")


def simplify(text: str) -> str:
    """Case-fold, drop punctuation, collapse whitespace."""
    text = text.lower().replace("-", " ").replace("_", " ")
    text = _CLEAN.sub(" ", text)
    return " ".join(text.split())


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, all cost 1)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,  # delete
                    current[j - 1] + 1,  # insert
                    previous[j - 1] + (ca != cb),  # substitute
                )
            )
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    """1 − levenshtein/longer-length over simplified text, in [0, 1]."""
    a, b = simplify(a), simplify(b)
    if not a or not b:
        return 1.0 if a == b else 0.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def cosine(u: list[float], v: list[float]) -> float:
    dot = sum(x * y for x, y in zip(u, v))
    nu = sum(x * x for x in u) ** 0.5
    nv = sum(y * y for y in v) ** 0.5
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


@dataclass
class NameCorrector:
    """Resolve a raw mention to a vocabulary name, or report no match.

    `embedder` is any object with `embed(texts) -> list[vector]`; when
    it raises, the edit-distance path takes over silently.
    """

    vocabulary: tuple[str, ...]
    threshold: float = 0.6
    embedder: object | None = None
    _by_simple: dict[str, str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.vocabulary:
            raise ValueError("NameCorrector needs a non-empty vocabulary")
        self._by_simple = {}
        for name in self.vocabulary:
            self._by_simple.setdefault(simplify(name), name)

    def correct(self, raw: str) -> str | None:
        exact = self._by_simple.get(simplify(raw))
        if exact is not None:
            return exact
        scored = self._embedding_scores(raw)
        if scored is None:
            scored = [(similarity(raw, name), name) for name in self.vocabulary]
        best_score = max(score for score, _ in scored)
        if best_score < self.threshold:
            return None
        return min(name for score, name in scored if score == best_score)

    def _embedding_scores(self, raw: str) -> list[tuple[float, str]] | None:
        if self.embedder is None:
            return None
        try:
            vectors = self.embedder.embed([raw, *self.vocabulary])
        except Exception:
            return None  # fall back to edit distance
        query, rest = vectors[0], vectors[1:]
        return [(cosine(query, v), name) for v, name in zip(rest, self.vocabulary)]
