"""Logical forms, the knowledge base, and native execution of forms to answer sets.

Logical forms are trees built from five node kinds:

    EntityRef(e)      -- the singleton set {e}
    Unary(p)          -- all entities with the unary fact p
    Join(b, child)    -- all subjects s with a binary fact b(s, o) whose object o
                         lies in the denotation of child
    Intersect(l, r)   -- set intersection
    Count(child)      -- |child|, allowed only at the root

Binary facts are directed (subject, object) pairs and Join always binds the
child denotation to the object position, so relations are stored with the
answer side as subject (e.g. child(RahulGandhi, SoniaGandhi) reads "Rahul is
a child of Sonia").  There is no reverse operator; both directions of a
relation are distinct predicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedForm, ParseError, UnknownSymbol

DEFAULT_MAX_DEPTH = 6


@dataclass(frozen=True)
class Entity:
    id: str
    name: str

    def __post_init__(self):
        if not self.id:
            raise MalformedForm("entity id must be non-empty")
        if not self.name:
            raise MalformedForm(f"entity {self.id!r} has an empty name")


@dataclass(frozen=True)
class Predicate:
    id: str
    arity: int

    def __post_init__(self):
        if not self.id:
            raise MalformedForm("predicate id must be non-empty")
        if self.arity not in (1, 2):
            raise MalformedForm(f"predicate {self.id!r} has arity {self.arity}, expected 1 or 2")


class LogicalForm:
    """Marker base class; concrete nodes are the five dataclasses below."""

    __slots__ = ()


@dataclass(frozen=True)
class EntityRef(LogicalForm):
    entity: str


@dataclass(frozen=True)
class Unary(LogicalForm):
    predicate: str


@dataclass(frozen=True)
class Join(LogicalForm):
    predicate: str
    child: LogicalForm


@dataclass(frozen=True)
class Intersect(LogicalForm):
    left: LogicalForm
    right: LogicalForm


@dataclass(frozen=True)
class Count(LogicalForm):
    child: LogicalForm


def serialize(lf: LogicalForm) -> str:
    """Canonical string form: `ent:ID`, `un:P`, `join(P, LF)`, `and(LF, LF)`
    with intersect children sorted lexicographically, `count(LF)`."""
    if isinstance(lf, EntityRef):
        return f"ent:{lf.entity}"
    if isinstance(lf, Unary):
        return f"un:{lf.predicate}"
    if isinstance(lf, Join):
        return f"join({lf.predicate}, {serialize(lf.child)})"
    if isinstance(lf, Intersect):
        a, b = sorted((serialize(lf.left), serialize(lf.right)))
        return f"and({a}, {b})"
    if isinstance(lf, Count):
        return f"count({serialize(lf.child)})"
    raise MalformedForm(f"unknown logical form node {lf!r}")


def depth(lf: LogicalForm) -> int:
    if isinstance(lf, (EntityRef, Unary)):
        return 1
    if isinstance(lf, Join):
        return 1 + depth(lf.child)
    if isinstance(lf, Intersect):
        return 1 + max(depth(lf.left), depth(lf.right))
    if isinstance(lf, Count):
        return 1 + depth(lf.child)
    raise MalformedForm(f"unknown logical form node {lf!r}")


def predicates_of(lf: LogicalForm) -> list[str]:
    """All predicate ids used in the form, in pre-order."""
    if isinstance(lf, EntityRef):
        return []
    if isinstance(lf, Unary):
        return [lf.predicate]
    if isinstance(lf, Join):
        return [lf.predicate] + predicates_of(lf.child)
    if isinstance(lf, Intersect):
        return predicates_of(lf.left) + predicates_of(lf.right)
    if isinstance(lf, Count):
        return predicates_of(lf.child)
    raise MalformedForm(f"unknown logical form node {lf!r}")


class KnowledgeBase:
    """Immutable store of entities, unary facts and directed binary facts.

    Predicates are declared implicitly by the facts that use them; a predicate
    id may not be used with both arities.
    """

    def __init__(self, entities, unary_facts=None, binary_facts=None):
        self.entities: dict[str, Entity] = {}
        for ent in entities:
            if ent.id in self.entities:
                raise MalformedForm(f"duplicate entity id {ent.id!r}")
            self.entities[ent.id] = ent
        self.unary_facts: dict[str, frozenset[str]] = {
            p: frozenset(es) for p, es in (unary_facts or {}).items()
        }
        self.binary_facts: dict[str, frozenset[tuple[str, str]]] = {
            p: frozenset(pairs) for p, pairs in (binary_facts or {}).items()
        }
        self.predicates: dict[str, Predicate] = {}
        for p in self.unary_facts:
            self.predicates[p] = Predicate(p, 1)
        for p in self.binary_facts:
            if p in self.predicates:
                raise MalformedForm(f"predicate {p!r} used with both arities")
            self.predicates[p] = Predicate(p, 2)
        self._validate()

    def _validate(self):
        for p, es in self.unary_facts.items():
            for e in es:
                if e not in self.entities:
                    raise MalformedForm(f"unary fact {p}({e}) references unknown entity {e!r}")
        for p, pairs in self.binary_facts.items():
            for s, o in pairs:
                if s not in self.entities or o not in self.entities:
                    raise MalformedForm(f"binary fact {p}({s},{o}) references an unknown entity")

    def has_entity(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def entity_name(self, entity_id: str) -> str:
        return self.entities[entity_id].name

    def __repr__(self):
        return (
            f"KnowledgeBase({len(self.entities)} entities, "
            f"{len(self.predicates)} predicates)"
        )


def validate_form(lf: LogicalForm, kb: KnowledgeBase, max_depth: int = DEFAULT_MAX_DEPTH):
    """Raise UnknownSymbol / MalformedForm unless `lf` is well-formed over `kb`."""
    if depth(lf) > max_depth:
        raise MalformedForm(f"form depth {depth(lf)} exceeds maximum {max_depth}")
    _validate_node(lf, kb, root=True)


def _validate_node(lf, kb, root=False):
    if isinstance(lf, Count):
        if not root:
            raise MalformedForm("count is only allowed at the root")
        _validate_node(lf.child, kb)
        return
    if isinstance(lf, EntityRef):
        if lf.entity not in kb.entities:
            raise UnknownSymbol(f"unknown entity {lf.entity!r}")
        return
    if isinstance(lf, Unary):
        pred = kb.predicates.get(lf.predicate)
        if pred is None:
            raise UnknownSymbol(f"unknown predicate {lf.predicate!r}")
        if pred.arity != 1:
            raise MalformedForm(f"predicate {lf.predicate!r} is not unary")
        return
    if isinstance(lf, Join):
        pred = kb.predicates.get(lf.predicate)
        if pred is None:
            raise UnknownSymbol(f"unknown predicate {lf.predicate!r}")
        if pred.arity != 2:
            raise MalformedForm(f"predicate {lf.predicate!r} is not binary")
        _validate_node(lf.child, kb)
        return
    if isinstance(lf, Intersect):
        _validate_node(lf.left, kb)
        _validate_node(lf.right, kb)
        return
    raise MalformedForm(f"unknown logical form node {lf!r}")


def execute(lf: LogicalForm, kb: KnowledgeBase, max_depth: int = DEFAULT_MAX_DEPTH):
    """Evaluate a logical form against the KB.

    Returns a frozenset of entity ids, or a non-negative int for a Count root.
    Pure: never mutates the KB.
    """
    validate_form(lf, kb, max_depth=max_depth)
    if isinstance(lf, Count):
        return len(_eval(lf.child, kb))
    return _eval(lf, kb)


def _eval(lf, kb) -> frozenset[str]:
    if isinstance(lf, EntityRef):
        return frozenset((lf.entity,))
    if isinstance(lf, Unary):
        return kb.unary_facts.get(lf.predicate, frozenset())
    if isinstance(lf, Join):
        child = _eval(lf.child, kb)
        pairs = kb.binary_facts.get(lf.predicate, frozenset())
        return frozenset(s for s, o in pairs if o in child)
    if isinstance(lf, Intersect):
        return _eval(lf.left, kb) & _eval(lf.right, kb)
    raise MalformedForm(f"unknown logical form node {lf!r}")


# ---------------------------------------------------------------------------
# KB file format: UTF-8, tab-separated, `#` starts a comment line.
#   entity <TAB> id <TAB> name
#   unary  <TAB> pred <TAB> entity
#   binary <TAB> pred <TAB> subject <TAB> object
# ---------------------------------------------------------------------------

def load_kb(path) -> KnowledgeBase:
    entities = []
    unary: dict[str, set[str]] = {}
    binary: dict[str, set[tuple[str, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            tag = fields[0]
            if tag == "entity":
                if len(fields) != 3:
                    raise ParseError("entity line needs id and name", path, lineno)
                entities.append(Entity(fields[1], fields[2]))
            elif tag == "unary":
                if len(fields) != 3:
                    raise ParseError("unary line needs predicate and entity", path, lineno)
                unary.setdefault(fields[1], set()).add(fields[2])
            elif tag == "binary":
                if len(fields) != 4:
                    raise ParseError("binary line needs predicate, subject, object", path, lineno)
                binary.setdefault(fields[1], set()).add((fields[2], fields[3]))
            else:
                raise ParseError(f"unknown record type {tag!r}", path, lineno)
    try:
        return KnowledgeBase(entities, unary, binary)
    except MalformedForm as exc:
        raise ParseError(str(exc), path) from exc


def dump_kb(kb: KnowledgeBase, path):
    """Write the KB in canonical order (sorted ids); load(dump(kb)) == kb."""
    lines = []
    for ent in sorted(kb.entities.values(), key=lambda e: e.id):
        lines.append(f"entity\t{ent.id}\t{ent.name}")
    for p in sorted(kb.unary_facts):
        for e in sorted(kb.unary_facts[p]):
            lines.append(f"unary\t{p}\t{e}")
    for p in sorted(kb.binary_facts):
        for s, o in sorted(kb.binary_facts[p]):
            lines.append(f"binary\t{p}\t{s}\t{o}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
