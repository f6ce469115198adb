"""Pydantic request/response models for the pipeline service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class PairIn(BaseModel):
    hs: str
    cn: str
    id: str | None = None
    source: Literal["seed_dataset", "generated", "post_edited"] = "generated"
    cn_type: str | None = None


class BackendSpec(BaseModel):
    kind: Literal["remote", "stub"] = "stub"
    endpoint: str = ""
    timeout: float = 30.0
    retries: int = 2
    stub_seed: int = 0
    bank_path: str | None = None


class GenerationParams(BaseModel):
    max_new_tokens: int = 256
    top_p: float = 0.9
    temperature: float = 1.0
    n_samples: int = 1


class GenerateSpec(BaseModel):
    hs: list[str]
    backend: BackendSpec = Field(default_factory=BackendSpec)
    params: GenerationParams = Field(default_factory=GenerationParams)
    max_in_flight: int = 4


class CandidatesRequest(BaseModel):
    pairs: list[PairIn] | None = None
    generate: GenerateSpec | None = None


class CandidatesResponse(BaseModel):
    ids: list[str]
    report: dict[str, Any] | None = None


class PairOut(BaseModel):
    id: str
    hs: str
    cn: str
    source: str
    state: str
    cn_type: str | None = None
    created_at: str | None = None
    replaces_id: str | None = None


class NextReviewResponse(BaseModel):
    pair: PairOut | None = None


class ScoreRequest(BaseModel):
    pair_id: str
    annotator_id: str
    score: int = Field(ge=0, le=3)
    bad_hs: bool = False
    elapsed: float = 0.0
    idempotency_key: str | None = None


class ScoreResponse(BaseModel):
    pair_id: str
    duplicate: bool
    tier: str | None = None


class ExpertItem(BaseModel):
    experiment_id: str
    condition: str
    pair: PairOut


class ExpertNextResponse(BaseModel):
    item: ExpertItem | None = None


class DecisionRequest(BaseModel):
    experiment_id: str
    pair_id: str
    operator_id: str
    action: Literal["validate", "edit", "discard"]
    edited_cn: str | None = None
    elapsed: float = 0.0
    idempotency_key: str | None = None


class DecisionResponse(BaseModel):
    pair_id: str
    action: str
    duplicate: bool = False
    edit_rate: float | None = None
    new_pair_id: str | None = None


class ConditionIn(BaseModel):
    reviewer_mode: Literal["expert_direct", "human_geq1", "human_geq2", "machine"]
    sampling: Literal["stratified", "uniform"] = "stratified"
    session_size: int = 20
    rng_seed: int = 0


class ExperimentRequest(BaseModel):
    conditions: list[ConditionIn]
    operators: list[str]
    pool_ids: list[str] | None = None


class ExperimentResponse(BaseModel):
    experiment: dict[str, Any]


class EffortResponse(BaseModel):
    experiment_id: str
    condition: str
    ngo_time_per_pair: float | None
    crowd_time_per_pair: float | None
    rr: float | None
    novelty: float | None
    pairs_selec: float
    pairs_final: float | None
    mean_hter: float | None
    counts: dict[str, int]


class HealthResponse(BaseModel):
    status: str
    pairs: int
    last_seq: int
