"""FastAPI service wrapping the core package.

Resources (KB, lexicons, dictionary, template DB, model) are loaded once when
the app is created and shared read-only across requests; training swaps the
in-memory model atomically.  File paths in mine/train/eval requests refer to
the server's filesystem.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import NoAnswer, ParseError, RewriteQAError
from ..learning import (
    ModelParams,
    answer,
    evaluate,
    generate_rewritings,
    load_model,
    load_qa,
    save_model,
    train,
)
from ..lexicon import analyze
from ..resources import Config, Resources
from ..rewriting import DictTrace, TemplateTrace
from ..templates import dump_template_db, load_clusters, mine_templates, render
from . import schemas


def describe_trace(trace) -> tuple[str, str]:
    """(kind, printable description) for a rewriting trace."""
    if isinstance(trace, DictTrace):
        parts = [
            f"{r.position}:{r.word}->{' '.join(r.explanation)}" for r in trace.replacements
        ]
        return "dict", "dict " + ", ".join(parts)
    if isinstance(trace, TemplateTrace):
        return (
            "template",
            f"template {render(trace.source)} => {render(trace.target)}"
            f" [{trace.entity_id}]",
        )
    return "identity", "identity"


def create_app(config: Config) -> FastAPI:
    resources = Resources.load(config)
    params = ModelParams(base_rate=config.base_rate, epsilon=config.epsilon)
    if config.model_path and Path(config.model_path).is_file():
        params = load_model(config.model_path, config.base_rate, config.epsilon)

    app = FastAPI(title="rewriteqa", version=__version__)
    app.state.config = config
    app.state.resources = resources
    app.state.params = params

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        res = app.state.resources
        return schemas.HealthResponse(
            status="ok",
            entities=len(res.kb.entities),
            predicates=len(res.kb.predicates),
            triggers=len(res.triggers),
            dictionary_entries=len(res.dictionary or {}),
            template_pairs=len(res.template_db) if res.template_db else 0,
            model_features=len(app.state.params.theta1) + len(app.state.params.theta2),
        )

    @app.post("/rewrite", response_model=schemas.RewriteResponse)
    def rewrite(request: schemas.RewriteRequest):
        res = app.state.resources
        cfg = app.state.config
        sentence = analyze(request.sentence, res.pos_lexicon, res.gazetteer)
        overrides = Config(
            kd=request.kd if request.kd is not None else cfg.kd,
            kt=request.kt if request.kt is not None else cfg.kt,
            beam=cfg.beam,
        )
        rewritings = generate_rewritings(sentence, res, overrides)
        out = []
        for rewriting in rewritings:
            kind, description = describe_trace(rewriting.trace)
            out.append(
                schemas.RewritingOut(
                    text=rewriting.text,
                    kind=kind,
                    trace=description,
                    features=dict(sorted(rewriting.features.items())),
                )
            )
        return schemas.RewriteResponse(sentence=request.sentence, rewritings=out)

    @app.post("/mine", response_model=schemas.MineResponse)
    def mine(request: schemas.MineRequest):
        res = app.state.resources
        if not Path(request.clusters_path).is_file():
            raise HTTPException(status_code=400, detail=f"no such file: {request.clusters_path}")
        clusters = load_clusters(request.clusters_path)
        db = mine_templates(clusters, res.pos_lexicon, threshold=request.threshold)
        dump_template_db(db, request.output_path)
        return schemas.MineResponse(
            pairs=len(db),
            clusters=len(clusters),
            clusters_skipped=db.clusters_skipped,
            output_path=request.output_path,
        )

    @app.post("/train", response_model=schemas.TrainResponse)
    def train_endpoint(request: schemas.TrainRequest):
        res = app.state.resources
        cfg = app.state.config
        if not Path(request.qa_path).is_file():
            raise HTTPException(status_code=400, detail=f"no such file: {request.qa_path}")
        try:
            data = load_qa(request.qa_path)
        except ParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if not data:
            raise HTTPException(status_code=400, detail="empty QA file")
        epochs = request.epochs if request.epochs is not None else cfg.epochs
        if epochs < 1:
            raise HTTPException(status_code=400, detail="epochs must be >= 1")
        run_cfg = Config(
            beam=cfg.beam, kd=cfg.kd, kt=cfg.kt, epochs=epochs,
            base_rate=cfg.base_rate, epsilon=cfg.epsilon,
            rerank_weight=cfg.rerank_weight, max_depth=cfg.max_depth,
        )
        traces = []
        params = train(data, res, run_cfg, traces=traces)
        model_path = request.model_path or cfg.model_path
        if model_path:
            save_model(params, model_path)
        app.state.params = params
        updates = sum(1 for t in traces if t.updated)
        skipped = sum(1 for t in traces if t.n_parsed == 0)
        return schemas.TrainResponse(
            examples=len(data),
            updates=updates,
            skipped=skipped,
            model_path=model_path,
            theta1_features=len(params.theta1),
            theta2_features=len(params.theta2),
        )

    @app.post("/answer", response_model=schemas.AnswerResponse)
    def answer_endpoint(request: schemas.AnswerRequest):
        res = app.state.resources
        try:
            result = answer(request.question, app.state.params, res, app.state.config)
        except NoAnswer:
            return schemas.AnswerResponse(found=False)
        _, description = describe_trace(result.rewriting.trace)
        response = schemas.AnswerResponse(
            found=True,
            rewriting=result.rewriting.text,
            logical_form=result.logical_form,
            score=result.score,
        )
        if isinstance(result.denotation, int):
            response.number = result.denotation
        else:
            response.answers = sorted(result.denotation)
        if request.explain:
            response.trace = description
        return response

    @app.post("/eval", response_model=schemas.EvalResponse)
    def eval_endpoint(request: "schemas.EvalRequest"):
        res = app.state.resources
        if not Path(request.qa_path).is_file():
            raise HTTPException(status_code=400, detail=f"no such file: {request.qa_path}")
        data = load_qa(request.qa_path)
        if not data:
            raise HTTPException(status_code=400, detail="empty QA file")
        report = evaluate(data, app.state.params, res, app.state.config,
                          mismatch_only=request.mismatch_only)
        mismatch_rows = [r for r in report.rows if r.mismatch]
        mismatch_block = None
        if mismatch_rows:
            n = len(mismatch_rows)
            mismatch_block = schemas.EvalBlock(
                precision=sum(r.precision for r in mismatch_rows) / n,
                recall=sum(r.recall for r in mismatch_rows) / n,
                f1=sum(r.f1 for r in mismatch_rows) / n,
                count=n,
            )
        return schemas.EvalResponse(
            overall=schemas.EvalBlock(
                precision=report.precision, recall=report.recall,
                f1=report.f1, count=report.count,
            ),
            mismatch=mismatch_block,
            rows=[
                schemas.EvalRowOut(
                    question=r.question, mismatch=r.mismatch, f1=r.f1, answered=r.answered
                )
                for r in report.rows
            ],
        )

    @app.exception_handler(RewriteQAError)
    def domain_error(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    return app
