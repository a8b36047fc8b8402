"""Shared test helpers: fixture paths, the independent denotation oracle,
random KB/logical-form generators, and a synthetic family-domain builder."""

from __future__ import annotations

import random
from pathlib import Path

from rewriteqa.kb import Count, Entity, EntityRef, Intersect, Join, KnowledgeBase, Unary
from rewriteqa.learning import QAPair
from rewriteqa.lexicon import LexiconEntry, build_gazetteer
from rewriteqa.resources import Config, Resources

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GANDHI = FIXTURES / "gandhi"
WORLD = FIXTURES / "world"
CLUSTERS = FIXTURES / "clusters"


def gandhi_config(**overrides) -> Config:
    base = dict(
        kb_path=str(GANDHI / "kb.tsv"),
        pos_path=str(GANDHI / "pos.tsv"),
        aliases_path=str(GANDHI / "aliases.tsv"),
        triggers_path=str(GANDHI / "triggers.tsv"),
        dict_path=str(GANDHI / "dict.tsv"),
        beam=50,
        epochs=3,
    )
    base.update(overrides)
    return Config(**base)


def world_config(**overrides) -> Config:
    base = dict(
        kb_path=str(WORLD / "kb.tsv"),
        pos_path=str(WORLD / "pos.tsv"),
        aliases_path=str(WORLD / "aliases.tsv"),
        triggers_path=str(WORLD / "triggers.tsv"),
        dict_path=str(WORLD / "dict.tsv"),
        template_db_path=str(WORLD / "template_db.tsv"),
        beam=50,
        epochs=3,
    )
    base.update(overrides)
    return Config(**base)


# ---------------------------------------------------------------------------
# Independent denotation oracle: enumerate every entity and test membership
# directly against the fact tables, with no set algebra.
# ---------------------------------------------------------------------------

def oracle_execute(lf, kb: KnowledgeBase):
    if isinstance(lf, Count):
        return len({e for e in kb.entities if oracle_holds(lf.child, e, kb)})
    return {e for e in kb.entities if oracle_holds(lf, e, kb)}


def oracle_holds(lf, entity_id: str, kb: KnowledgeBase) -> bool:
    if isinstance(lf, EntityRef):
        return entity_id == lf.entity
    if isinstance(lf, Unary):
        return entity_id in kb.unary_facts.get(lf.predicate, frozenset())
    if isinstance(lf, Join):
        pairs = kb.binary_facts.get(lf.predicate, frozenset())
        for other in kb.entities:
            if (entity_id, other) in pairs and oracle_holds(lf.child, other, kb):
                return True
        return False
    if isinstance(lf, Intersect):
        return oracle_holds(lf.left, entity_id, kb) and oracle_holds(lf.right, entity_id, kb)
    raise TypeError(f"unexpected {lf!r}")


# ---------------------------------------------------------------------------
# Random KBs and logical forms
# ---------------------------------------------------------------------------

def random_kb(rng: random.Random, max_entities: int = 20) -> KnowledgeBase:
    n = rng.randint(4, max_entities)
    ids = [f"e{i}" for i in range(n)]
    entities = [Entity(i, f"thing {i}") for i in ids]
    unary = {}
    for p in range(rng.randint(1, 3)):
        unary[f"u{p}"] = set(rng.sample(ids, rng.randint(1, n)))
    binary = {}
    for p in range(rng.randint(1, 3)):
        pairs = {
            (rng.choice(ids), rng.choice(ids)) for _ in range(rng.randint(1, 3 * n))
        }
        binary[f"b{p}"] = pairs
    return KnowledgeBase(entities, unary, binary)


def random_lf(rng: random.Random, kb: KnowledgeBase, max_depth: int = 3, root: bool = True):
    unaries = sorted(p for p, d in kb.predicates.items() if d.arity == 1)
    binaries = sorted(p for p, d in kb.predicates.items() if d.arity == 2)
    if root and rng.random() < 0.2:
        return Count(random_lf(rng, kb, max_depth - 1, root=False))
    if max_depth <= 1:
        kinds = ["entity", "unary"]
    else:
        kinds = ["entity", "unary", "join", "join", "intersect"]
    kind = rng.choice(kinds)
    if kind == "entity":
        return EntityRef(rng.choice(sorted(kb.entities)))
    if kind == "unary":
        return Unary(rng.choice(unaries))
    if kind == "join":
        return Join(rng.choice(binaries), random_lf(rng, kb, max_depth - 1, root=False))
    return Intersect(
        random_lf(rng, kb, max_depth - 1, root=False),
        random_lf(rng, kb, max_depth - 1, root=False),
    )


# ---------------------------------------------------------------------------
# Synthetic family domain with only value-1 features: terse questions keep
# skip counts at one and unary gender predicates avoid double entity spans.
# ---------------------------------------------------------------------------

FIRST = ["anna", "ben", "clara", "david", "emma", "felix", "grace", "henry",
         "ivy", "jack", "karen", "leo", "maria", "nina", "oscar", "paul"]
LAST = ["miller", "chen", "kim", "lopez", "rossi", "weber", "abel", "black",
        "cole", "diaz", "egan", "fox"]


def synthetic_family(n_families: int, seed: int = 7):
    """(resources, qa_pairs): terse parent/child questions over generated
    families, one third of them needing the daughter/son dictionary."""
    rng = random.Random(seed)
    entities = []
    child_facts = set()
    parent_facts = set()
    female = set()
    male = set()
    qa: list[QAPair] = []
    for f in range(n_families):
        last = LAST[f % len(LAST)] + ("" if f < len(LAST) else str(f))
        parent_first = FIRST[f % len(FIRST)]
        parent = f"{parent_first}_{last}"
        entities.append(Entity(parent, f"{parent_first} {last}"))
        (female if f % 2 == 0 else male).add(parent)
        kids = []
        others = [n for n in FIRST if n != parent_first]
        for k in range(2):
            kid_first = others[(f * 2 + k) % len(others)]
            kid = f"{kid_first}_{last}"
            entities.append(Entity(kid, f"{kid_first} {last}"))
            (female if k == 0 else male).add(kid)
            child_facts.add((kid, parent))
            parent_facts.add((parent, kid))
            kids.append((kid, f"{kid_first} {last}"))
        parent_name = f"{parent_first} {last}"
        qa.append(QAPair(f"child of {parent_name}", tuple(name for _, name in kids)))
        qa.append(QAPair(f"daughter of {parent_name}", (kids[0][1],), mismatch=True))
        qa.append(QAPair(f"son of {parent_name}", (kids[1][1],), mismatch=True))
        qa.append(QAPair(f"parent of {kids[0][1]}", (parent_name,)))
    kb = KnowledgeBase(
        entities,
        unary_facts={"female": female, "male": male},
        binary_facts={"child": child_facts, "parent": parent_facts},
    )
    triggers = {}
    for phrase, predicate, kind in [
        ("child", "child", "binary"),
        ("daughter", "child", "binary"),
        ("son", "child", "binary"),
        ("parent", "parent", "binary"),
        ("female", "female", "unary"),
        ("male", "male", "unary"),
    ]:
        triggers.setdefault((phrase,), []).append(LexiconEntry((phrase,), predicate, kind))
    pos = {"of": "IN", "child": "NN", "daughter": "NN", "son": "NN", "parent": "NN",
           "female": "JJ", "male": "JJ"}
    resources = Resources(
        kb=kb,
        pos_lexicon=pos,
        gazetteer=build_gazetteer(kb),
        triggers=triggers,
        dictionary={"daughter": ("female", "child"), "son": ("male", "child")},
        template_db=None,
    )
    return resources, qa
