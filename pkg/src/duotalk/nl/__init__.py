"""Natural-language layer: parsing, generation, and name correction.

Deterministic implementations run offline with no dependencies; the
``llm`` module holds drop-in HTTP-backed replacements for both
directions plus an embedding client.
"""

from .generation import GREETINGS, DeterministicGenerator, GenerationError
from .names import NameCorrector, levenshtein, similarity, simplify
from .parsing import DeterministicParser, ParseContext, Vocabulary

__all__ = [
    "DeterministicGenerator",
    "DeterministicParser",
    "GREETINGS",
    "GenerationError",
    "NameCorrector",
    "ParseContext",
    "Vocabulary",
    "levenshtein",
    "similarity",
    "simplify",
]
