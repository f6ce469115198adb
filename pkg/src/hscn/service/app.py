"""FastAPI service wrapping the pipeline engine.

Every mutation lands in the event store through the engine (the single
writer); request handling itself is concurrent. Domain errors surface as
structured ``{"error": {code, message}}`` responses with a stable code.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from ..author.backends import AuthorBackend, GenerationRequest
from ..author.generate import batch_generate
from ..errors import PipelineError
from ..events import Store
from ..orchestrator.engine import PipelineEngine
from ..orchestrator.experiments import PipelineConfig, ReviewerMode, SamplingMode
from ..pairs import CnType, HsCnPair, PairSource
from . import schemas


def _pair_out(record: dict) -> schemas.PairOut:
    return schemas.PairOut(**record)


def create_app(
    store_dir: str | Path | None = None,
    engine: PipelineEngine | None = None,
) -> FastAPI:
    if engine is None:
        engine = PipelineEngine(Store(store_dir))
    app = FastAPI(title="hscn pipeline", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(PipelineError)
    async def pipeline_error_handler(_request: Request, exc: PipelineError):
        return JSONResponse(status_code=exc.http_status, content={"error": exc.to_payload()})

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        state = engine.state
        return schemas.HealthResponse(status="ok", pairs=len(state.pairs), last_seq=state.last_seq)

    @app.post("/candidates", response_model=schemas.CandidatesResponse)
    def post_candidates(body: schemas.CandidatesRequest):
        ids: list[str] = []
        report = None
        if body.pairs:
            pairs = [
                HsCnPair(
                    hate_speech=item.hs,
                    counter_narrative=item.cn,
                    **({"id": item.id} if item.id else {}),
                    source=PairSource(item.source),
                    cn_type=CnType(item.cn_type) if item.cn_type else None,
                )
                for item in body.pairs
            ]
            ids.extend(engine.ingest(pairs))
        if body.generate:
            backend = AuthorBackend(
                kind=body.generate.backend.kind,
                endpoint=body.generate.backend.endpoint,
                timeout=body.generate.backend.timeout,
                retries=body.generate.backend.retries,
                stub_seed=body.generate.backend.stub_seed,
                bank_path=body.generate.backend.bank_path,
            )
            req = GenerationRequest(
                max_new_tokens=body.generate.params.max_new_tokens,
                top_p=body.generate.params.top_p,
                temperature=body.generate.params.temperature,
                n_samples=body.generate.params.n_samples,
            )
            candidates, batch_report = batch_generate(
                body.generate.hs, backend, req,
                max_in_flight=body.generate.max_in_flight, store=engine.store,
            )
            ids.extend(p.id for p in candidates)
            report = batch_report.to_dict()
        return schemas.CandidatesResponse(ids=ids, report=report)

    @app.get("/review/next", response_model=schemas.NextReviewResponse)
    def review_next(annotator: str = Query(min_length=1)):
        pair = engine.next_for_review(annotator)
        return schemas.NextReviewResponse(pair=_pair_out(pair.to_record()) if pair else None)

    @app.post("/review/score", response_model=schemas.ScoreResponse)
    def review_score(body: schemas.ScoreRequest):
        result = engine.submit_score(
            pair_id=body.pair_id,
            annotator_id=body.annotator_id,
            score=body.score,
            bad_hs=body.bad_hs,
            elapsed=body.elapsed,
            key=body.idempotency_key,
        )
        return schemas.ScoreResponse(**result)

    @app.post("/experiments", response_model=schemas.ExperimentResponse)
    def create_experiment(body: schemas.ExperimentRequest):
        configs = [
            PipelineConfig(
                reviewer_mode=ReviewerMode(c.reviewer_mode),
                sampling=SamplingMode(c.sampling),
                session_size=c.session_size,
                rng_seed=c.rng_seed,
            )
            for c in body.conditions
        ]
        payload = engine.create_experiment(configs, body.operators, pool_ids=body.pool_ids)
        return schemas.ExperimentResponse(experiment=payload)

    @app.get("/expert/next", response_model=schemas.ExpertNextResponse)
    def expert_next(operator: str = Query(min_length=1), experiment: str | None = None):
        item = engine.next_for_expert(operator, experiment_id=experiment)
        if item is None:
            return schemas.ExpertNextResponse(item=None)
        return schemas.ExpertNextResponse(item=schemas.ExpertItem(
            experiment_id=item["experiment_id"],
            condition=item["condition"],
            pair=_pair_out(item["pair"]),
        ))

    @app.post("/expert/decision", response_model=schemas.DecisionResponse)
    def expert_decision(body: schemas.DecisionRequest):
        result = engine.submit_decision(
            experiment_id=body.experiment_id,
            pair_id=body.pair_id,
            operator_id=body.operator_id,
            action=body.action,
            edited_cn=body.edited_cn,
            elapsed=body.elapsed,
            key=body.idempotency_key,
        )
        return schemas.DecisionResponse(
            pair_id=result.get("pair_id", body.pair_id),
            action=result.get("action", body.action),
            duplicate=result.get("duplicate", False),
            edit_rate=result.get("edit_rate"),
            new_pair_id=result.get("new_pair_id"),
        )

    @app.get("/reports/effort", response_model=schemas.EffortResponse)
    def reports_effort(
        experiment: str,
        condition: str,
        seconds_per_judgment: float = 35.0,
        judgments_per_pair: int = 2,
    ):
        report = engine.effort_report(
            experiment, condition,
            seconds_per_judgment=seconds_per_judgment,
            judgments_per_pair=judgments_per_pair,
        )
        return schemas.EffortResponse(**report.to_dict())

    @app.get("/export/accepted")
    def export_accepted():
        lines = [json.dumps(rec, ensure_ascii=False, sort_keys=True) for rec in engine.export_accepted()]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(content=body, media_type="application/x-ndjson")

    return app
