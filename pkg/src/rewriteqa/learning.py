"""Joint model over rewritings and derivations: scoring, reward and training.

The score of a (sentence, rewriting, derivation) triple decomposes into a
rewriting part and a parsing part:

    score(x, x', d) = theta1 . phi(x, x') + theta2 . phi(x', d)

Training consumes question/answer pairs only.  For every candidate rewriting
the parser's K-best roots are scored; the oracle is the highest-reward root,
the update target is the root that wins after adding `rerank_weight * reward`
to the model score, and the best target across rewritings drives one AdaGrad
update of each parameter block, scaled by its reward.  Updates do not follow
a likelihood objective; the reward only modulates their magnitude, so after
each update the chosen target's score does not drop.

Reward is answer-set F1 against the gold answers, with gold names resolved to
entity ids through the KB; numeric (count) denotations compare by equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NoAnswer, ParseError
from .features import rewrite_features
from .kb import KnowledgeBase, execute, serialize
from .lexicon import Sentence, analyze
from .parser import Derivation, ParserConfig, parse_chart, softmax, sparse_dot
from .rewriting import Rewriting, dict_rewrites, identity_rewriting
from .templates import template_rewrites


@dataclass
class ModelParams:
    theta1: dict[str, float] = field(default_factory=dict)
    theta2: dict[str, float] = field(default_factory=dict)
    accum1: dict[str, float] = field(default_factory=dict)
    accum2: dict[str, float] = field(default_factory=dict)
    base_rate: float = 1.0
    epsilon: float = 1e-8

    def copy(self) -> "ModelParams":
        return ModelParams(
            dict(self.theta1), dict(self.theta2), dict(self.accum1), dict(self.accum2),
            self.base_rate, self.epsilon,
        )


@dataclass(frozen=True)
class QAPair:
    question: str
    gold: tuple[str, ...]
    mismatch: bool = False

    def __post_init__(self):
        if not self.gold:
            raise ValueError("gold answer set must be non-empty")


@dataclass
class TrainingTrace:
    """What one example contributed to training; kept for diagnostics."""

    question: str
    n_rewritings: int
    n_parsed: int
    rewriting_text: str | None = None
    target_lf: str | None = None
    reward: float = 0.0
    updated: bool = False
    joint_before: float = 0.0
    joint_after: float = 0.0


# ---------------------------------------------------------------------------
# Reward
# ---------------------------------------------------------------------------

def resolve_gold(gold, kb: KnowledgeBase) -> frozenset[str]:
    """Map gold answer names to entity ids; unresolved names stay as
    `name:` sentinels so they still count against recall."""
    by_name = {}
    for ent in kb.entities.values():
        key = " ".join(ent.name.lower().split())
        if key not in by_name or ent.id < by_name[key]:
            by_name[key] = ent.id
    resolved = set()
    for answer in gold:
        key = " ".join(answer.lower().split())
        if key in by_name:
            resolved.add(by_name[key])
        elif answer in kb.entities:
            resolved.add(answer)
        else:
            resolved.add(f"name:{answer}")
    return frozenset(resolved)


def set_f1(predicted: frozenset[str], gold_ids: frozenset[str]) -> tuple[float, float, float]:
    if not predicted or not gold_ids:
        return 0.0, 0.0, 0.0
    hits = len(predicted & gold_ids)
    if hits == 0:
        return 0.0, 0.0, 0.0
    precision = hits / len(predicted)
    recall = hits / len(gold_ids)
    return precision, recall, 2 * precision * recall / (precision + recall)


def denotation_scores(denotation, gold, kb) -> tuple[float, float, float]:
    """Precision/recall/F1 of a denotation against raw gold answers."""
    if isinstance(denotation, int):
        ok = len(gold) == 1 and str(denotation) == str(gold[0]).strip()
        return (1.0, 1.0, 1.0) if ok else (0.0, 0.0, 0.0)
    return set_f1(denotation, resolve_gold(gold, kb))


def reward(derivation: Derivation, gold, kb: KnowledgeBase) -> float:
    """Answer-set F1 of the derivation's execution; execution errors score 0."""
    try:
        denotation = execute(derivation.lf, kb)
    except Exception:
        return 0.0
    return denotation_scores(denotation, gold, kb)[2]


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def joint_score(rewriting: Rewriting, derivation: Derivation, params: ModelParams, db=None) -> float:
    rw = rewrite_features(rewriting, db, derivation.lf if derivation else None)
    score = sparse_dot(params.theta1, rw)
    if derivation is not None:
        score += sparse_dot(params.theta2, derivation.features)
    return score


def rewrite_log_prob(vectors: list[dict[str, float]], chosen: int, theta1: dict[str, float]) -> float:
    """log p(x'_chosen | x) under the softmax of theta1 . phi over candidates."""
    scores = [sparse_dot(theta1, v) for v in vectors]
    top = max(scores)
    logz = top + math.log(sum(math.exp(s - top) for s in scores))
    return scores[chosen] - logz


def rewrite_gradient(vectors: list[dict[str, float]], chosen: int, theta1: dict[str, float]) -> dict[str, float]:
    """Gradient of the softmax log-probability: phi(chosen) - E[phi]."""
    probs = softmax([sparse_dot(theta1, v) for v in vectors])
    grad = dict(vectors[chosen])
    for p, vec in zip(probs, vectors):
        for f, v in vec.items():
            grad[f] = grad.get(f, 0.0) - p * v
    return {f: v for f, v in grad.items() if v != 0.0}


def _parse_target_gradient(target: Derivation, roots, cells, theta2) -> dict[str, float]:
    """Per-step gradients summed over the target derivation's history.

    Each node of the target was chosen against the surviving beam of its
    chart cell; the step gradient is phi(node) - E[phi] under the log-linear
    distribution over that beam.  For the root step the candidate pool is
    `roots`: every root derivation the example produced across all of its
    rewritings, which is exactly the competition the answerer faces.
    """
    grad: dict[str, float] = {}
    stack = [(target, True)]
    nodes = []
    while stack:
        node, is_root = stack.pop()
        nodes.append((node, is_root))
        for child in node.children:
            stack.append((child, False))
    for node, is_root in nodes:
        candidates = list(roots) if is_root else list(cells.get(node.span, ()))
        if not any(c is node for c in candidates):
            if not any(c.kind == node.kind and c.key == node.key for c in candidates):
                candidates.append(node)
        if len(candidates) == 1 and candidates[0] is node:
            continue  # uncontested step, zero gradient
        probs = softmax([sparse_dot(theta2, c.features) for c in candidates])
        for f, v in node.features.items():
            grad[f] = grad.get(f, 0.0) + v
        for p, candidate in zip(probs, candidates):
            for f, v in candidate.features.items():
                grad[f] = grad.get(f, 0.0) - p * v
    return {f: v for f, v in grad.items() if v != 0.0}


def adagrad_update(theta, accum, grad, base_rate, epsilon):
    """Per-feature AdaGrad step; accumulators grow before the step so the
    first touch of a feature moves it by about base_rate."""
    for f, g in grad.items():
        if g == 0.0:
            continue
        accum[f] = accum.get(f, 0.0) + g * g
        theta[f] = theta.get(f, 0.0) + base_rate / (epsilon + math.sqrt(accum[f])) * g


# ---------------------------------------------------------------------------
# Candidate generation and the training loop
# ---------------------------------------------------------------------------

def generate_rewritings(sentence: Sentence, resources, config) -> list[Rewriting]:
    """Identity plus dictionary and template rewritings, caps applied,
    deduplicated on the rewritten token sequence (first wins)."""
    candidates = [identity_rewriting(sentence)]
    if resources.dictionary is not None:
        candidates.extend(
            dict_rewrites(sentence, resources.dictionary, config.kd,
                          resources.pos_lexicon, resources.gazetteer)
        )
    if resources.template_db is not None:
        candidates.extend(
            template_rewrites(sentence, resources.template_db, config.kt,
                              resources.pos_lexicon, resources.gazetteer)
        )
    seen = set()
    out = []
    for rewriting in candidates:
        key = rewriting.rewritten.surfaces()
        if key in seen:
            continue
        seen.add(key)
        out.append(rewriting)
    return out


def _parser_config(config) -> ParserConfig:
    return ParserConfig(beam=config.beam, max_depth=config.max_depth)


def train(data, resources, config, traces: list[TrainingTrace] | None = None) -> ModelParams:
    """Online joint training from question/answer pairs.

    Examples are visited in input order for `config.epochs` passes; examples
    where no rewriting parses, or where every candidate has zero reward,
    apply no update.
    """
    if config.epochs < 1:
        raise ValueError("epochs must be >= 1")
    params = ModelParams(base_rate=config.base_rate, epsilon=config.epsilon)
    pconfig = _parser_config(config)
    kb = resources.kb
    db = resources.template_db
    for _ in range(config.epochs):
        for qa in data:
            sentence = analyze(qa.question, resources.pos_lexicon, resources.gazetteer)
            rewritings = generate_rewritings(sentence, resources, config)
            trace = TrainingTrace(question=qa.question, n_rewritings=len(rewritings), n_parsed=0)
            best = None  # (reward, index, rewriting, target, result)
            parsed: list[tuple[int, Rewriting, object, Derivation]] = []
            for index, rewriting in enumerate(rewritings):
                result = parse_chart(rewriting.rewritten, resources.triggers, kb,
                                     params.theta2, pconfig)
                if not result.roots:
                    continue
                trace.n_parsed += 1
                rewards = [reward(d, qa.gold, kb) for d in result.roots]
                target_index = max(
                    range(len(result.roots)),
                    key=lambda r: (result.roots[r].score + config.rerank_weight * rewards[r], -r),
                )
                target = result.roots[target_index]
                target_reward = rewards[target_index]
                parsed.append((index, rewriting, result, target))
                if best is None or target_reward > best[0]:
                    best = (target_reward, index, rewriting, target, result)
            if traces is not None:
                traces.append(trace)
            if best is None:
                continue
            target_reward, best_index, best_rewriting, target, result = best
            trace.rewriting_text = best_rewriting.text
            trace.target_lf = serialize(target.lf)
            trace.reward = target_reward
            if target_reward <= 0.0:
                continue
            # rewriting feature vectors, augmented per candidate with the
            # template-to-predicate feature of its own update target
            target_by_index = {index: t for index, _, _, t in parsed}
            vectors = [
                rewrite_features(rw, db, target_by_index[i].lf if i in target_by_index else None)
                for i, rw in enumerate(rewritings)
            ]
            trace.joint_before = (
                sparse_dot(params.theta1, vectors[best_index])
                + sparse_dot(params.theta2, target.features)
            )
            root_pool = [root for _, _, res_i, _ in parsed for root in res_i.roots]
            grad2 = _parse_target_gradient(target, root_pool, result.cells, params.theta2)
            adagrad_update(
                params.theta2, params.accum2,
                {f: target_reward * v for f, v in grad2.items()},
                params.base_rate, params.epsilon,
            )
            grad1 = rewrite_gradient(vectors, best_index, params.theta1)
            adagrad_update(
                params.theta1, params.accum1,
                {f: target_reward * v for f, v in grad1.items()},
                params.base_rate, params.epsilon,
            )
            trace.joint_after = (
                sparse_dot(params.theta1, vectors[best_index])
                + sparse_dot(params.theta2, target.features)
            )
            trace.updated = True
    return params


# ---------------------------------------------------------------------------
# Answering and evaluation
# ---------------------------------------------------------------------------

@dataclass
class Answer:
    denotation: frozenset[str] | int
    rewriting: Rewriting
    derivation: Derivation
    score: float

    @property
    def logical_form(self) -> str:
        return serialize(self.derivation.lf)


def answer(question: str, params: ModelParams, resources, config) -> Answer:
    """Best (rewriting, derivation) by joint score, executed against the KB."""
    sentence = analyze(question, resources.pos_lexicon, resources.gazetteer)
    rewritings = generate_rewritings(sentence, resources, config)
    pconfig = _parser_config(config)
    best = None
    for rewriting in rewritings:
        roots = parse_chart(rewriting.rewritten, resources.triggers, resources.kb,
                            params.theta2, pconfig).roots
        for derivation in roots:
            score = joint_score(rewriting, derivation, params, resources.template_db)
            if best is None or score > best.score:
                best = Answer(
                    denotation=frozenset(), rewriting=rewriting,
                    derivation=derivation, score=score,
                )
    if best is None:
        raise NoAnswer(f"no rewriting of {question!r} parses")
    best.denotation = execute(best.derivation.lf, resources.kb)
    return best


@dataclass
class EvalRow:
    question: str
    mismatch: bool
    precision: float
    recall: float
    f1: float
    answered: bool


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    count: int
    rows: list[EvalRow] = field(default_factory=list)


def _summarize(rows) -> EvalReport:
    n = len(rows)
    if n == 0:
        return EvalReport(0.0, 0.0, 0.0, 0, [])
    return EvalReport(
        precision=sum(r.precision for r in rows) / n,
        recall=sum(r.recall for r in rows) / n,
        f1=sum(r.f1 for r in rows) / n,
        count=n,
        rows=list(rows),
    )


def evaluate(data, params: ModelParams, resources, config, mismatch_only=False) -> EvalReport:
    """Macro-averaged precision/recall/F1; unanswered questions score zero."""
    rows = []
    for qa in data:
        if mismatch_only and not qa.mismatch:
            continue
        try:
            result = answer(qa.question, params, resources, config)
        except NoAnswer:
            rows.append(EvalRow(qa.question, qa.mismatch, 0.0, 0.0, 0.0, answered=False))
            continue
        p, r, f1 = denotation_scores(result.denotation, qa.gold, resources.kb)
        rows.append(EvalRow(qa.question, qa.mismatch, p, r, f1, answered=True))
    return _summarize(rows)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def load_qa(path) -> list[QAPair]:
    """`question<TAB>answer1|answer2|...[<TAB>mismatch]` lines."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3) or not fields[0] or not fields[1]:
                raise ParseError("expected `question<TAB>answers[<TAB>mismatch]`", path, lineno)
            answers = tuple(a for a in fields[1].split("|") if a)
            if not answers:
                raise ParseError("empty answer set", path, lineno)
            mismatch = len(fields) == 3 and fields[2] == "mismatch"
            if len(fields) == 3 and not mismatch:
                raise ParseError(f"unknown marker {fields[2]!r}", path, lineno)
            out.append(QAPair(fields[0], answers, mismatch))
    return out


def dump_qa(data, path):
    lines = []
    for qa in data:
        marker = "\tmismatch" if qa.mismatch else ""
        lines.append(f"{qa.question}\t{'|'.join(qa.gold)}{marker}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def save_model(params: ModelParams, path):
    """`theta1|theta2<TAB>feature<TAB>weight<TAB>accum`, sorted by feature id;
    load/save round-trips byte-identically."""
    lines = []
    for block, theta, accum in (
        ("theta1", params.theta1, params.accum1),
        ("theta2", params.theta2, params.accum2),
    ):
        for feature in sorted(set(theta) | set(accum)):
            lines.append(
                f"{block}\t{feature}\t{theta.get(feature, 0.0)!r}\t{accum.get(feature, 0.0)!r}"
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def load_model(path, base_rate=1.0, epsilon=1e-8) -> ModelParams:
    params = ModelParams(base_rate=base_rate, epsilon=epsilon)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4 or fields[0] not in ("theta1", "theta2"):
                raise ParseError("expected `theta1|theta2<TAB>feature<TAB>weight<TAB>accum`",
                                 path, lineno)
            try:
                weight = float(fields[2])
                accum = float(fields[3])
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from exc
            theta = params.theta1 if fields[0] == "theta1" else params.theta2
            acc = params.accum1 if fields[0] == "theta1" else params.accum2
            if weight != 0.0:
                theta[fields[1]] = weight
            if accum != 0.0:
                acc[fields[1]] = accum
    return params
