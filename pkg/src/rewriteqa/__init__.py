"""Knowledge-base question answering with sentence rewriting.

Questions are first rewritten (dictionary explanations for single words,
paraphrase templates for multi-word expressions) to close the gap between how
people phrase things and how the knowledge base names them, then parsed into
executable logical forms by a beam chart parser; a jointly trained log-linear
model picks the best rewriting/derivation pair.
"""

__version__ = "0.1.0"

from .kb import (  # noqa: F401
    Count,
    Entity,
    EntityRef,
    Intersect,
    Join,
    KnowledgeBase,
    Predicate,
    Unary,
    execute,
    load_kb,
    serialize,
)
from .learning import ModelParams, QAPair, answer, evaluate, train  # noqa: F401
from .lexicon import Sentence, Token, analyze, tokenize  # noqa: F401
from .resources import Config, Resources  # noqa: F401
