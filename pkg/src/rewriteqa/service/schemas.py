"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    entities: int
    predicates: int
    triggers: int
    dictionary_entries: int
    template_pairs: int
    model_features: int


class RewriteRequest(BaseModel):
    sentence: str = Field(min_length=1)
    kd: int | None = None
    kt: int | None = None


class RewritingOut(BaseModel):
    text: str
    kind: str  # identity | dict | template
    trace: str
    features: dict[str, float]


class RewriteResponse(BaseModel):
    sentence: str
    rewritings: list[RewritingOut]


class MineRequest(BaseModel):
    clusters_path: str
    output_path: str
    threshold: int = 3


class MineResponse(BaseModel):
    pairs: int
    clusters: int
    clusters_skipped: int
    output_path: str


class TrainRequest(BaseModel):
    qa_path: str
    model_path: str | None = None
    epochs: int | None = None


class TrainResponse(BaseModel):
    examples: int
    updates: int
    skipped: int
    model_path: str | None
    theta1_features: int
    theta2_features: int


class AnswerRequest(BaseModel):
    question: str = Field(min_length=1)
    explain: bool = False


class AnswerResponse(BaseModel):
    found: bool
    answers: list[str] | None = None
    number: int | None = None
    rewriting: str | None = None
    logical_form: str | None = None
    trace: str | None = None
    score: float | None = None


class EvalRequest(BaseModel):
    qa_path: str
    mismatch_only: bool = False


class EvalBlock(BaseModel):
    precision: float
    recall: float
    f1: float
    count: int


class EvalRowOut(BaseModel):
    question: str
    mismatch: bool
    f1: float
    answered: bool


class EvalResponse(BaseModel):
    overall: EvalBlock
    mismatch: EvalBlock | None = None
    rows: list[EvalRowOut]
