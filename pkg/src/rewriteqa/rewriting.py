"""Dictionary-based sentence rewriting.

A word with a one-to-many vocabulary mismatch ("daughter") is replaced by its
dictionary explanation ("female child") so the sentence structurally matches
the logical form it should parse into.  Only common nouns outside entity
spans are rewritten; each non-empty subset of rewritable positions yields one
candidate, plus the identity rewriting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ParseError
from .lexicon import Sentence, analyze, common_noun_positions


@dataclass(frozen=True)
class DictReplacement:
    position: int  # token position in the original sentence
    word: str
    explanation: tuple[str, ...]


@dataclass(frozen=True)
class DictTrace:
    replacements: tuple[DictReplacement, ...]


@dataclass(frozen=True)
class TemplateTrace:
    source: tuple[str, ...]  # template matched in the original, with $y
    target: tuple[str, ...]  # template the rewriting came from, with $y
    entity_id: str
    entity_surface: tuple[str, ...]


@dataclass(frozen=True)
class IdentityTrace:
    pass


Trace = DictTrace | TemplateTrace | IdentityTrace


@dataclass(frozen=True)
class Rewriting:
    original: Sentence
    rewritten: Sentence
    trace: Trace
    features: dict[str, float] = field(compare=False)

    @property
    def text(self) -> str:
        return " ".join(self.rewritten.surfaces())


def identity_rewriting(sentence: Sentence) -> Rewriting:
    from . import features as _features

    return Rewriting(
        original=sentence,
        rewritten=sentence,
        trace=IdentityTrace(),
        features=_features.identity_features(),
    )


MAX_EXPLANATION_WORDS = 5


def load_dictionary(path) -> dict[str, tuple[str, ...]]:
    """Load `word<TAB>explanation[<TAB>pos]` lines.

    Keeps the first sense per word, drops explanations longer than five words
    and drops entries whose optional POS column is not a noun tag.
    """
    dictionary: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3) or not fields[0] or not fields[1].strip():
                raise ParseError("expected `word<TAB>explanation[<TAB>pos]`", path, lineno)
            if len(fields) == 3 and not fields[2].startswith("NN"):
                continue
            word = fields[0].lower()
            explanation = tuple(fields[1].lower().split())
            if len(explanation) > MAX_EXPLANATION_WORDS:
                continue
            if word not in dictionary:
                dictionary[word] = explanation
    return dictionary


def dict_rewrites(
    sentence: Sentence,
    dictionary: dict[str, tuple[str, ...]],
    cap: int,
    pos_lexicon,
    gazetteer,
) -> list[Rewriting]:
    """All dictionary rewritings of `sentence`, identity first.

    Candidates are ordered by ascending number of replaced positions, then by
    the positions themselves left to right, and truncated to `cap` entries
    (identity included).  Replaced words must be dictionary-covered common
    nouns outside entity spans; substituted words are re-tagged and the new
    sentence re-linked.
    """
    from . import features as _features

    if cap <= 0:
        return []
    covered = [
        i for i in common_noun_positions(sentence) if sentence.tokens[i].surface in dictionary
    ]
    out = [identity_rewriting(sentence)]
    surfaces = sentence.surfaces()
    for size in range(1, len(covered) + 1):
        for positions in itertools.combinations(covered, size):
            if len(out) >= cap:
                return out
            replacements = tuple(
                DictReplacement(i, surfaces[i], dictionary[surfaces[i]]) for i in positions
            )
            rewritten_words: list[str] = []
            for i, word in enumerate(surfaces):
                if i in positions:
                    rewritten_words.extend(dictionary[word])
                else:
                    rewritten_words.append(word)
            rewritten = analyze(" ".join(rewritten_words), pos_lexicon, gazetteer)
            trace = DictTrace(replacements)
            out.append(
                Rewriting(
                    original=sentence,
                    rewritten=rewritten,
                    trace=trace,
                    features=_features.dict_features(sentence, trace),
                )
            )
    return out[:cap]
