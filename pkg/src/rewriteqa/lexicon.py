"""Tokenization, lexicon POS tagging, gazetteer entity linking and trigger lexicons.

Tagging is a pure lexicon lookup (word -> tag, UNK as fallback); entity
linking is greedy longest-match against a gazetteer derived from KB entity
names plus an optional alias file.  Everything here is immutable after load
and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError
from .kb import KnowledgeBase

UNK_TAG = "UNK"
_TERMINAL_PUNCT = "?.!"


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str


@dataclass(frozen=True)
class Sentence:
    raw: str
    tokens: tuple[Token, ...]
    entity_spans: tuple[tuple[int, int, str], ...]

    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    def in_entity_span(self, position: int) -> bool:
        return any(start <= position < end for start, end, _ in self.entity_spans)

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class LexiconEntry:
    phrase: tuple[str, ...]
    predicate: str
    kind: str  # "unary" | "binary"


def tokenize(raw: str) -> list[str]:
    """Lowercase, split on whitespace, strip trailing `?`/`.`/`!` per word.

    Internal apostrophes stay part of the word ("gandhi's" is one token).
    """
    words = []
    for word in raw.lower().split():
        while word and word[-1] in _TERMINAL_PUNCT:
            word = word[:-1]
        if word:
            words.append(word)
    return words


def tag(words, pos_lexicon) -> list[Token]:
    """Look each word up in the POS lexicon; unknown words get UNK."""
    return [Token(w, pos_lexicon.get(w, UNK_TAG)) for w in words]


def find_entities(words, gazetteer) -> list[tuple[int, int, str]]:
    """Greedy longest-match, left to right, over lowercased gazetteer names.

    Returns sorted, non-overlapping (start, end, entity_id) spans.
    """
    if not gazetteer:
        return []
    max_len = max(name.count(" ") + 1 for name in gazetteer)
    spans = []
    i = 0
    n = len(words)
    while i < n:
        match = None
        for j in range(min(n, i + max_len), i, -1):
            candidate = " ".join(words[i:j])
            if candidate in gazetteer:
                match = (i, j, gazetteer[candidate])
                break
        if match:
            spans.append(match)
            i = match[1]
        else:
            i += 1
    return spans


def analyze(raw: str, pos_lexicon, gazetteer) -> Sentence:
    """Tokenize, tag and entity-link a raw question."""
    words = tokenize(raw)
    tokens = tuple(tag(words, pos_lexicon))
    spans = tuple(find_entities(words, gazetteer))
    return Sentence(raw=raw, tokens=tokens, entity_spans=spans)


def is_noun_tag(pos: str) -> bool:
    return pos.startswith("NN")


def common_noun_positions(sentence: Sentence) -> list[int]:
    """Positions of noun-tagged tokens outside entity spans."""
    return [
        i
        for i, tok in enumerate(sentence.tokens)
        if is_noun_tag(tok.pos) and not sentence.in_entity_span(i)
    ]


def build_gazetteer(kb: KnowledgeBase, aliases=None) -> dict[str, str]:
    """Name -> entity id map from KB entity names; alias entries override.

    Name collisions inside the KB resolve to the lexicographically smallest
    entity id, deterministically.
    """
    gazetteer: dict[str, str] = {}
    for ent in kb.entities.values():
        key = " ".join(ent.name.lower().split())
        if not key:
            continue
        if key not in gazetteer or ent.id < gazetteer[key]:
            gazetteer[key] = ent.id
    for alias, entity_id in (aliases or {}).items():
        gazetteer[" ".join(alias.lower().split())] = entity_id
    return gazetteer


# ---------------------------------------------------------------------------
# File formats (tab-separated, UTF-8, `#` comments):
#   POS lexicon:  word <TAB> tag
#   Aliases:      alias <TAB> entity-id
#   Triggers:     phrase <TAB> predicate <TAB> unary|binary
# ---------------------------------------------------------------------------

def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_pos_lexicon(path) -> dict[str, str]:
    lexicon = {}
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ParseError("expected `word<TAB>tag`", path, lineno)
        lexicon.setdefault(fields[0].lower(), fields[1])
    return lexicon


def load_aliases(path) -> dict[str, str]:
    aliases = {}
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ParseError("expected `alias<TAB>entity-id`", path, lineno)
        aliases[fields[0].lower()] = fields[1]
    return aliases


def load_triggers(path, kb: KnowledgeBase) -> dict[tuple[str, ...], list[LexiconEntry]]:
    """Phrase -> trigger entries; predicates are validated against the KB."""
    triggers: dict[tuple[str, ...], list[LexiconEntry]] = {}
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError("expected `phrase<TAB>predicate<TAB>unary|binary`", path, lineno)
        phrase = tuple(fields[0].lower().split())
        predicate, kind = fields[1], fields[2]
        if not phrase:
            raise ParseError("empty phrase", path, lineno)
        if kind not in ("unary", "binary"):
            raise ParseError(f"bad trigger kind {kind!r}", path, lineno)
        declared = kb.predicates.get(predicate)
        if declared is None:
            raise ParseError(f"trigger references unknown predicate {predicate!r}", path, lineno)
        want = 1 if kind == "unary" else 2
        if declared.arity != want:
            raise ParseError(
                f"trigger kind {kind} does not match arity of {predicate!r}", path, lineno
            )
        triggers.setdefault(phrase, []).append(LexiconEntry(phrase, predicate, kind))
    return triggers
