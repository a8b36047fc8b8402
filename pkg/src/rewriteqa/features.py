"""Feature vectors for sentence rewritings.

All ids live in the `rw:` namespace (parser features use `parse:`); vectors
are sparse dicts and never store zero values.  Extraction is a pure function
of its inputs.
"""

from __future__ import annotations

from collections import Counter

from .errors import MissingPair
from .kb import EntityRef, Join, LogicalForm, Unary
from .lexicon import Sentence
from .rewriting import DictTrace, TemplateTrace
from .templates import SLOT, TemplatePairDB, render


def identity_features() -> dict[str, float]:
    return {"rw:identity": 1.0}


def dict_features(original: Sentence, trace: DictTrace) -> dict[str, float]:
    """Four indicators per replacement: the word, the replacement, and the POS
    tags of the neighbours of the replaced word in the original sentence."""
    feats: dict[str, float] = {}
    tokens = original.tokens
    for rep in trace.replacements:
        explanation = " ".join(rep.explanation)
        feats[f"rw:d:word:{rep.word}"] = 1.0
        feats[f"rw:d:repl:{rep.word}->{explanation}"] = 1.0
        left = tokens[rep.position - 1].pos if rep.position > 0 else "BOS"
        right = tokens[rep.position + 1].pos if rep.position + 1 < len(tokens) else "EOS"
        feats[f"rw:d:lpos:{left}"] = 1.0
        feats[f"rw:d:rpos:{right}"] = 1.0
    return feats


def template_similarity(original: Sentence, template) -> float:
    """Word overlap between the sentence and the template's non-slot words,
    as a fraction of the template's non-slot words (multiset semantics)."""
    template_words = Counter(w for w in template if w != SLOT)
    if not template_words:
        return 0.0
    sentence_words = Counter(original.surfaces())
    overlap = sum((template_words & sentence_words).values())
    return overlap / sum(template_words.values())


def atomic_predicate(lf: LogicalForm | None) -> str | None:
    """The predicate of a single-predicate form: Unary(p) or Join(p, entity)."""
    if isinstance(lf, Unary):
        return lf.predicate
    if isinstance(lf, Join) and isinstance(lf.child, EntityRef):
        return lf.predicate
    return None


def template_features(
    original: Sentence,
    trace: TemplateTrace,
    db: TemplatePairDB,
    derivation_root_lf: LogicalForm | None = None,
) -> dict[str, float]:
    """Pair indicator, source-template similarity, pair PMI, and (when the
    final logical form is a single atomic predicate) the template-to-predicate
    mapping indicator."""
    if (trace.source, trace.target) not in db:
        raise MissingPair(
            f"template pair ({render(trace.source)!r}, {render(trace.target)!r}) not in DB"
        )
    feats: dict[str, float] = {
        f"rw:t:pair:{render(trace.source)}|{render(trace.target)}": 1.0
    }
    sim = template_similarity(original, trace.source)
    if sim != 0.0:
        feats["rw:t:sim"] = sim
    pmi = db.pmi(trace.source, trace.target)
    if pmi != 0.0:
        feats["rw:t:pmi"] = pmi
    predicate = atomic_predicate(derivation_root_lf)
    if predicate is not None:
        feats[f"rw:t:map:{render(trace.target)}->{predicate}"] = 1.0
    return feats


def rewrite_features(rewriting, db: TemplatePairDB | None, root_lf: LogicalForm | None):
    """The rewriting's feature vector, augmented for template rewritings with
    the template-to-predicate feature of the derivation being scored."""
    trace = rewriting.trace
    if isinstance(trace, TemplateTrace) and db is not None:
        return template_features(rewriting.original, trace, db, root_lf)
    return dict(rewriting.features)
