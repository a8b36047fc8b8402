"""Beam chart parser producing K-best logical-form derivations.

The chart is built bottom-up over token spans.  Base derivations come from
gazetteer entity spans (EntityRef) and trigger-lexicon phrase matches (Unary
sets and binary relations).  Combination rules:

    join       relation + set (either order, adjacent or over the same span)
               -> Join(b, set)
    compose    set left-adjacent to a relation -> a composed relation whose
               output is filtered by the set; applying it to an argument
               yields Intersect(Join(b, arg), set).  This is what lets
               "sonia gandhi's female child" come out as
               and(join(child, ent:SG), join(gender, ent:female)).
    intersect  two adjacent (or same-span) sets -> Intersect
    skip       a derivation absorbs one neighbouring token that is not part
               of an entity span
    count      a root-level wrapper emitted when the sentence contains a
               count trigger phrase ("how many")

Each cell keeps the top-K derivations by model score theta2 . phi, ties broken
by the canonical logical-form serialization so runs are bit-reproducible.
Root derivations must span the whole sentence and contain at least one
predicate: a bare entity mention is not a query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .kb import (
    Count,
    EntityRef,
    Intersect,
    Join,
    KnowledgeBase,
    LogicalForm,
    Unary,
    depth,
    serialize,
)
from .lexicon import Sentence

SET = "set"
REL = "rel"
CREL = "crel"

DEFAULT_COUNT_TRIGGERS = (("how", "many"),)


@dataclass
class ParserConfig:
    beam: int = 200
    max_depth: int = 6
    enable_intersect: bool = True
    enable_count: bool = True
    count_triggers: tuple[tuple[str, ...], ...] = DEFAULT_COUNT_TRIGGERS

    def __post_init__(self):
        if self.beam < 1:
            raise ValueError("beam must be >= 1")


@dataclass(eq=False)
class Derivation:
    span: tuple[int, int]
    kind: str  # set | rel | crel
    rule: str
    children: tuple["Derivation", ...]
    features: dict[str, float]
    score: float
    lf: LogicalForm | None = None  # set derivations
    rel: str | None = None  # rel / crel derivations
    modifier: LogicalForm | None = None  # crel output filter
    key: str = ""

    def __post_init__(self):
        if not self.key:
            if self.kind == SET:
                self.key = serialize(self.lf)
            elif self.kind == REL:
                self.key = f"rel:{self.rel}"
            else:
                self.key = f"crel:{self.rel}|{serialize(self.modifier)}"


def _predicated(lf: LogicalForm) -> bool:
    """True when the set is predicate-bearing (not a bare entity mention)."""
    return isinstance(lf, (Join, Unary, Intersect))


def _conjunct_keys(lf: LogicalForm) -> set[str]:
    if isinstance(lf, Intersect):
        return _conjunct_keys(lf.left) | _conjunct_keys(lf.right)
    return {serialize(lf)}


def _join_features(predicate: str, arg: LogicalForm) -> dict[str, float]:
    """Indicators tying a binary predicate to the shape (and, for entity
    arguments, the identity) of its argument."""
    feats = {f"parse:joinarg:{predicate}:{_root_tag(arg)}": 1.0}
    if isinstance(arg, EntityRef):
        feats[f"parse:join:{predicate}|{arg.entity}"] = 1.0
    return feats


def sparse_dot(weights: dict[str, float], feats: dict[str, float]) -> float:
    if len(weights) < len(feats):
        weights, feats = feats, weights
    return sum(weights.get(f, 0.0) * v for f, v in feats.items())


def softmax(scores) -> list[float]:
    """Numerically stable softmax (max subtraction)."""
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def action_distribution(candidates: list[Derivation], theta2: dict[str, float]) -> list[float]:
    """Log-linear distribution over competing derivations."""
    if not candidates:
        raise ValueError("empty candidate set")
    return softmax([sparse_dot(theta2, c.features) for c in candidates])


def parse_features(sentence: Sentence, derivation: Derivation) -> dict[str, float]:
    """The derivation's aggregated feature vector (a defensive copy)."""
    return dict(derivation.features)


@dataclass
class ParseResult:
    roots: list[Derivation]
    cells: dict[tuple[int, int], list[Derivation]]
    sentence: Sentence


def _merge(parts, extra=None) -> dict[str, float]:
    # parse features are indicators: presence, not counts
    out: dict[str, float] = {}
    for feats in parts:
        for f in feats:
            out[f] = 1.0
    for f in extra or {}:
        out[f] = 1.0
    return out


def has_count_trigger(sentence: Sentence, config: ParserConfig) -> bool:
    words = sentence.surfaces()
    for trigger in config.count_triggers:
        k = len(trigger)
        if any(words[i : i + k] == trigger for i in range(len(words) - k + 1)):
            return True
    return False


class _Chart:
    def __init__(self, sentence, triggers, theta2, config):
        self.sentence = sentence
        self.triggers = triggers or {}
        self.theta2 = theta2
        self.config = config
        self.cells: dict[tuple[int, int], list[Derivation]] = {}
        self.entity_positions = {
            i for start, end, _ in sentence.entity_spans for i in range(start, end)
        }

    def _make(self, span, kind, rule, children, local, lf=None, rel=None, modifier=None):
        feats = _merge([c.features for c in children], local)
        return Derivation(
            span=span,
            kind=kind,
            rule=rule,
            children=tuple(children),
            features=feats,
            score=sparse_dot(self.theta2, feats),
            lf=lf,
            rel=rel,
            modifier=modifier,
        )

    def _lexical(self, i, j):
        out = []
        for start, end, entity_id in self.sentence.entity_spans:
            if (start, end) == (i, j):
                out.append(
                    self._make(
                        (i, j), SET, "entity", (), {"parse:rule:entity": 1.0},
                        lf=EntityRef(entity_id),
                    )
                )
        phrase = self.sentence.surfaces()[i:j]
        for entry in self.triggers.get(phrase, ()):
            local = {
                f"parse:rule:lexical-{entry.kind}": 1.0,
                f"parse:lex:{' '.join(entry.phrase)}->{entry.predicate}": 1.0,
                f"parse:pred:{entry.predicate}": 1.0,
            }
            if entry.kind == "unary":
                out.append(
                    self._make((i, j), SET, "lexical-unary", (), local, lf=Unary(entry.predicate))
                )
            else:
                out.append(
                    self._make((i, j), REL, "lexical-binary", (), local, rel=entry.predicate)
                )
        return out

    def _combine(self, span, left, right):
        out = []
        out.extend(self._apply_relation(span, left, right))
        out.extend(self._apply_relation(span, right, left))
        if (self.config.enable_intersect and left.kind == SET and right.kind == REL
                and isinstance(left.lf, (Join, Unary))):
            # the set filters the relation's output: "female child (of X)"
            if depth(left.lf) + 1 <= self.config.max_depth:
                out.append(
                    self._make(
                        span, CREL, "compose", (left, right), {"parse:rule:compose": 1.0},
                        rel=right.rel, modifier=left.lf,
                    )
                )
        if self.config.enable_intersect and left.kind == SET and right.kind == SET:
            out.extend(self._intersect(span, left, right))
        return out

    def _apply_relation(self, span, rel_deriv, arg):
        if arg.kind != SET or rel_deriv.kind not in (REL, CREL):
            return []
        joined = Join(rel_deriv.rel, arg.lf)
        local = {"parse:rule:join": 1.0}
        local.update(_join_features(rel_deriv.rel, arg.lf))
        if rel_deriv.kind == REL:
            if depth(joined) > self.config.max_depth:
                return []
            return [self._make(span, SET, "join", (rel_deriv, arg), local, lf=joined)]
        lf = Intersect(joined, rel_deriv.modifier)
        if depth(lf) > self.config.max_depth:
            return []
        local["parse:rule:intersect"] = 1.0
        return [self._make(span, SET, "intersect", (rel_deriv, arg), local, lf=lf)]

    def _intersect(self, span, left, right):
        # conjunctions stay flat: the left operand may itself be a conjunction,
        # the right conjunct must contribute a new single-predicate set
        if not isinstance(right.lf, (Join, Unary)) or not _predicated(left.lf):
            return []
        if serialize(right.lf) in _conjunct_keys(left.lf):
            return []
        lf = Intersect(left.lf, right.lf)
        if depth(lf) > self.config.max_depth:
            return []
        return [
            self._make(span, SET, "intersect", (left, right), {"parse:rule:intersect": 1.0}, lf=lf)
        ]

    def _skips(self, i, j):
        out = []
        if j - i < 2:
            return out
        if j - 1 not in self.entity_positions:
            for d in self.cells.get((i, j - 1), ()):
                out.append(self._skip((i, j), d))
        if i not in self.entity_positions:
            for d in self.cells.get((i + 1, j), ()):
                out.append(self._skip((i, j), d))
        return out

    def _skip(self, span, child):
        return self._make(
            span, child.kind, "skip", (child,), {"parse:rule:skip": 1.0},
            lf=child.lf, rel=child.rel, modifier=child.modifier,
        )

    def _prune(self, derivations) -> list[Derivation]:
        best: dict[tuple[str, str], Derivation] = {}
        for d in derivations:
            k = (d.kind, d.key)
            kept = best.get(k)
            if kept is None or d.score > kept.score:
                best[k] = d
        ranked = sorted(best.values(), key=lambda d: (-d.score, d.key, d.kind))
        return ranked[: self.config.beam]

    def fill(self):
        n = len(self.sentence)
        for length in range(1, n + 1):
            for i in range(0, n - length + 1):
                j = i + length
                pool = list(self._lexical(i, j))
                for k in range(i + 1, j):
                    for left in self.cells.get((i, k), ()):
                        for right in self.cells.get((k, j), ()):
                            pool.extend(self._combine((i, j), left, right))
                pool.extend(self._skips(i, j))
                beam = self._prune(pool)
                # one same-span pass over the pruned beam (e.g. the word
                # "female" is both an entity and a gender trigger)
                shared = []
                for a in beam:
                    for b in beam:
                        if a is b:
                            continue
                        shared.extend(self._combine((i, j), a, b))
                if shared:
                    beam = self._prune(beam + shared)
                if beam:
                    self.cells[(i, j)] = beam


def parse_chart(
    sentence: Sentence,
    triggers,
    kb: KnowledgeBase,
    theta2: dict[str, float],
    config: ParserConfig,
) -> ParseResult:
    """Parse and keep the full chart (needed for training updates)."""
    chart = _Chart(sentence, triggers, theta2, config)
    chart.fill()
    n = len(sentence)
    roots: list[Derivation] = []
    counting = config.enable_count and has_count_trigger(sentence, config)
    for d in chart.cells.get((0, n), ()):
        if d.kind != SET or isinstance(d.lf, EntityRef):
            continue
        roots.append(_as_root(d, d.lf, "root", (), counting, theta2))
        if counting and depth(d.lf) + 1 <= config.max_depth:
            roots.append(_as_root(d, Count(d.lf), "count", {"parse:rule:count": 1.0}, counting, theta2))
    roots.sort(key=lambda d: (-d.score, d.key))
    return ParseResult(roots=roots[: config.beam], cells=chart.cells, sentence=sentence)


def _root_tag(lf) -> str:
    if isinstance(lf, Join):
        return "join"
    if isinstance(lf, Intersect):
        return "and"
    if isinstance(lf, Count):
        return "count"
    if isinstance(lf, Unary):
        return "un"
    return "ent"


def _as_root(child, lf, rule, local, counting, theta2):
    extra = dict(local) if local else {}
    extra[f"parse:root:{_root_tag(lf)}"] = 1.0
    extra[f"parse:depth:{depth(lf)}"] = 1.0
    if counting:
        extra["parse:count_trigger"] = 1.0
    feats = _merge([child.features], extra)
    if rule == "count":
        return Derivation(
            span=child.span, kind=SET, rule="count", children=(child,),
            features=feats, score=sparse_dot(theta2, feats), lf=lf,
        )
    return replace(child, features=feats, score=sparse_dot(theta2, feats), key=serialize(lf))


def parse(
    sentence: Sentence,
    triggers,
    kb: KnowledgeBase,
    theta2: dict[str, float],
    config: ParserConfig,
) -> list[Derivation]:
    """K-best root derivations, best first; empty list when nothing parses."""
    return parse_chart(sentence, triggers, kb, theta2, config).roots
