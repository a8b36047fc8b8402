"""Template-based sentence rewriting and paraphrase-template-pair mining.

A template is a question with exactly one argument slot `$y`.  Pairs of
templates that co-occur in question clusters (all questions in a cluster mean
the same thing) form the paraphrase pair database; rewriting retrieves pairs
whose first template matches the entity-slotted sentence and substitutes the
entity back into the second template.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import MalformedForm, ParseError
from .lexicon import Sentence, analyze, is_noun_tag, tag, tokenize

log = logging.getLogger(__name__)

SLOT = "$y"

Template = tuple[str, ...]


def validate_template(template: Template):
    if template.count(SLOT) != 1:
        raise MalformedForm(f"template needs exactly one {SLOT}: {template!r}")
    if len(template) < 2:
        raise MalformedForm(f"template needs at least one non-slot word: {template!r}")


def render(template: Template) -> str:
    return " ".join(template)


def _pair_key(t1: Template, t2: Template) -> tuple[Template, Template]:
    return (t1, t2) if render(t1) <= render(t2) else (t2, t1)


class TemplatePairDB:
    """Paraphrase template pairs with co-occurrence counts and PMI.

    Pairs are unordered: (t1, t2) and (t2, t1) retrieve the same record.
    """

    def __init__(self, pairs=None, clusters_skipped=0):
        # canonical (t1, t2) with render(t1) <= render(t2) -> (count, pmi)
        self.pairs: dict[tuple[Template, Template], tuple[int, float]] = {}
        self._index: dict[Template, list[Template]] = {}
        self.clusters_skipped = clusters_skipped
        for (t1, t2), (count, pmi) in (pairs or {}).items():
            self.add(t1, t2, count, pmi)

    def add(self, t1: Template, t2: Template, count: int, pmi: float):
        validate_template(t1)
        validate_template(t2)
        if not math.isfinite(pmi):
            raise MalformedForm(f"non-finite PMI for pair ({render(t1)!r}, {render(t2)!r})")
        key = _pair_key(t1, t2)
        if key not in self.pairs:
            a, b = key
            self._index.setdefault(a, []).append(b)
            self._index.setdefault(b, []).append(a)
        self.pairs[key] = (count, pmi)

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        return _pair_key(*pair) in self.pairs

    def count(self, t1: Template, t2: Template) -> int:
        return self.pairs[_pair_key(t1, t2)][0]

    def pmi(self, t1: Template, t2: Template) -> float:
        return self.pairs[_pair_key(t1, t2)][1]

    def partners(self, t1: Template) -> list[tuple[Template, int, float]]:
        """All (t2, count, pmi) stored with t1, in insertion order."""
        out = []
        for t2 in self._index.get(t1, ()):
            count, pmi = self.pairs[_pair_key(t1, t2)]
            out.append((t2, count, pmi))
        return out


# ---------------------------------------------------------------------------
# Mining
# ---------------------------------------------------------------------------

def load_clusters(path) -> list[list[str]]:
    """Blank-line-separated blocks, one question per line."""
    clusters: list[list[str]] = []
    current: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line:
                if current:
                    clusters.append(current)
                    current = []
                continue
            current.append(line)
    if current:
        clusters.append(current)
    return clusters


def _noun_like(pos: str) -> bool:
    # unknown words are usually names, which is why they are unknown
    return is_noun_tag(pos) or pos == "UNK"


def _occurs_at(words, needle) -> int:
    """First start index of contiguous `needle` in `words`, or -1."""
    k = len(needle)
    for i in range(len(words) - k + 1):
        if tuple(words[i : i + k]) == needle:
            return i
    return -1


def shared_noun_sequence(questions: list[list[str]], pos_lexicon) -> tuple[str, ...] | None:
    """Longest contiguous word sequence with at least one noun-like word that
    occurs in every question of the cluster.

    Ties between equal-length candidates break lexicographically so mining is
    insensitive to question order.
    """
    first = questions[0]
    candidates = []
    for length in range(len(first), 0, -1):
        for start in range(len(first) - length + 1):
            seq = tuple(first[start : start + length])
            tags = tag(list(seq), pos_lexicon)
            if not any(_noun_like(t.pos) for t in tags):
                continue
            if all(_occurs_at(q, seq) >= 0 for q in questions[1:]):
                candidates.append(seq)
        if candidates:
            return min(candidates)
    return None


def slot_question(words: list[str], shared: tuple[str, ...], pos_lexicon) -> Template | None:
    """Replace the shared sequence (extended over adjacent noun-like words)
    with the slot marker.

    The extension lets "chembakolli india" collapse to one slot when the
    shared sequence is just "chembakolli", so clusters with trailing place
    words still produce clean templates.
    """
    start = _occurs_at(words, shared)
    if start < 0:
        return None
    end = start + len(shared)
    tags = tag(words, pos_lexicon)
    while start > 0 and _noun_like(tags[start - 1].pos):
        start -= 1
    while end < len(words) and _noun_like(tags[end].pos):
        end += 1
    template = tuple(words[:start]) + (SLOT,) + tuple(words[end:])
    if len(template) < 2:
        return None
    return template


def mine_templates(clusters: list[list[str]], pos_lexicon, threshold: int = 3) -> TemplatePairDB:
    """Build the paraphrase pair database from question clusters.

    Each cluster contributes its set of distinct templates; every unordered
    pair of them counts once per cluster.  Pairs with count <= threshold are
    dropped.  PMI(t1,t2) = log(c(t1,t2) * T / (c(t1) * c(t2))) where c counts
    clusters and T is the number of clusters that produced any template.
    """
    pair_counts: dict[tuple[Template, Template], int] = {}
    template_counts: dict[Template, int] = {}
    total = 0
    skipped = 0
    for cluster in clusters:
        if len(cluster) < 2:
            skipped += 1
            continue
        questions = [tokenize(q) for q in cluster]
        questions = [q for q in questions if q]
        if len(questions) < 2:
            skipped += 1
            continue
        shared = shared_noun_sequence(questions, pos_lexicon)
        if shared is None:
            log.warning("cluster skipped, no shared noun sequence: %r", cluster[0])
            skipped += 1
            continue
        templates = set()
        for q in questions:
            template = slot_question(q, shared, pos_lexicon)
            if template is not None:
                templates.add(template)
        if len(templates) < 2:
            skipped += 1
            continue
        total += 1
        for t in templates:
            template_counts[t] = template_counts.get(t, 0) + 1
        ordered = sorted(templates, key=render)
        for i in range(len(ordered)):
            for j in range(i + 1, len(ordered)):
                key = _pair_key(ordered[i], ordered[j])
                pair_counts[key] = pair_counts.get(key, 0) + 1
    db = TemplatePairDB(clusters_skipped=skipped)
    for (t1, t2), count in pair_counts.items():
        if count <= threshold:
            continue
        pmi = math.log(count * total / (template_counts[t1] * template_counts[t2]))
        db.add(t1, t2, count, pmi)
    return db


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

def sentence_templates(sentence: Sentence) -> list[Template]:
    """One template per entity span, that span replaced by the slot."""
    return [t for t, _ in _templates_with_spans(sentence)]


def _templates_with_spans(sentence: Sentence):
    surfaces = sentence.surfaces()
    out = []
    for start, end, entity_id in sentence.entity_spans:
        template = surfaces[:start] + (SLOT,) + surfaces[end:]
        if len(template) < 2:
            continue
        out.append((template, (start, end, entity_id)))
    return out


def template_rewrites(
    sentence: Sentence,
    db: TemplatePairDB,
    cap: int,
    pos_lexicon,
    gazetteer,
) -> list[Rewriting]:
    """Rewritings via exact template-pair retrieval, best PMI first.

    For each sentence template st and stored pair (st, t2), the rewriting is
    t2 with the slot replaced by the original entity surface.  Candidates are
    ordered by descending PMI, then lexicographically by target and source
    template, and truncated to `cap`.
    """
    from . import features as _features
    from .rewriting import Rewriting, TemplateTrace

    if cap <= 0:
        return []
    surfaces = sentence.surfaces()
    candidates = []
    for st, (start, end, entity_id) in _templates_with_spans(sentence):
        for t2, count, pmi in db.partners(st):
            candidates.append((-pmi, render(t2), render(st), st, t2, (start, end, entity_id)))
    candidates.sort(key=lambda c: c[:3])
    out = []
    for _, _, _, st, t2, (start, end, entity_id) in candidates[:cap]:
        surface = surfaces[start:end]
        words: list[str] = []
        for word in t2:
            if word == SLOT:
                words.extend(surface)
            else:
                words.append(word)
        rewritten = analyze(" ".join(words), pos_lexicon, gazetteer)
        trace = TemplateTrace(source=st, target=t2, entity_id=entity_id, entity_surface=surface)
        out.append(
            Rewriting(
                original=sentence,
                rewritten=rewritten,
                trace=trace,
                features=_features.template_features(sentence, trace, db),
            )
        )
    return out


# ---------------------------------------------------------------------------
# DB file format: t1 <TAB> t2 <TAB> count <TAB> pmi, slot written literally.
# ---------------------------------------------------------------------------

def load_template_db(path) -> TemplatePairDB:
    db = TemplatePairDB()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError("expected `t1<TAB>t2<TAB>count<TAB>pmi`", path, lineno)
            try:
                t1 = tuple(fields[0].split())
                t2 = tuple(fields[1].split())
                count = int(fields[2])
                pmi = float(fields[3])
                db.add(t1, t2, count, pmi)
            except (ValueError, MalformedForm) as exc:
                raise ParseError(str(exc), path, lineno) from exc
    return db


def dump_template_db(db: TemplatePairDB, path):
    lines = [
        f"{render(t1)}\t{render(t2)}\t{count}\t{pmi!r}"
        for (t1, t2), (count, pmi) in sorted(db.pairs.items(), key=lambda kv: (render(kv[0][0]), render(kv[0][1])))
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
