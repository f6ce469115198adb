"""The pipeline engine: one writer over the event store plus volatile
claim bookkeeping.

Claims (which pair an annotator or operator is currently holding) are
in-memory only, guarded by the engine lock, and expire after a visibility
timeout so abandoned items return to the queue. They are deliberately not
events: replay determinism would otherwise depend on wall clock.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from ..errors import InsufficientPool, UnknownId, WrongState
from ..events import (
    EXPERIMENT_CREATED,
    FILTERED,
    GENERATED,
    SCORED,
    VALIDATED,
    Store,
    StoreState,
)
from ..metrics import RRConfig, edit_rate
from ..normalize import normalize_text
from ..pairs import HsCnPair, PairSource, PairState
from ..review.classifier import DEFAULT_THRESHOLD, score_pair
from ..review.scoring import FilterTier, ReviewScore, aggregate
from .experiments import PipelineConfig, route
from .reports import (
    JUDGMENTS_PER_PAIR,
    SECONDS_PER_JUDGMENT,
    EffortReport,
    effort_report,
)

# Claimed items invisible to other fetches for this long (seconds).
DEFAULT_CLAIM_TTL = 300.0
# Client-reported elapsed may exceed the server-observed claim window by
# at most this slack before the event is flagged.
ELAPSED_SLACK_S = 5.0


@dataclass
class _Claim:
    expires: float
    started: float


class PipelineEngine:
    """Serializes every mutation; safe to share across request threads."""

    def __init__(
        self,
        store: Store,
        claim_ttl: float = DEFAULT_CLAIM_TTL,
        clock=time.monotonic,
    ):
        self.store = store
        self.claim_ttl = claim_ttl
        self._clock = clock
        self._lock = threading.RLock()
        self._claims: dict[tuple[str, str, str], _Claim] = {}

    @property
    def state(self) -> StoreState:
        return self.store.state

    # -- claims --------------------------------------------------------

    def _expire_claims(self) -> None:
        now = self._clock()
        expired = [k for k, c in self._claims.items() if c.expires <= now]
        for k in expired:
            del self._claims[k]

    def _claim(self, role: str, subject: str, pair_id: str) -> _Claim:
        now = self._clock()
        claim = _Claim(expires=now + self.claim_ttl, started=now)
        self._claims[(role, subject, pair_id)] = claim
        return claim

    def _release(self, role: str, subject: str, pair_id: str) -> _Claim | None:
        return self._claims.pop((role, subject, pair_id), None)

    # -- ingestion -------------------------------------------------------

    def ingest(self, pairs: list[HsCnPair]) -> list[str]:
        with self._lock:
            for pair in pairs:
                self.store.append(GENERATED, {"pair": pair.to_record()})
            return [p.id for p in pairs]

    # -- non-expert review -------------------------------------------------

    def next_for_review(self, annotator_id: str) -> HsCnPair | None:
        """Atomically claim the next pair this annotator can judge."""
        with self._lock:
            self._expire_claims()
            state = self.state
            for pair in state.pairs.values():
                if pair.source != PairSource.generated:
                    continue
                if pair.state not in (PairState.candidate, PairState.human_review,
                                      PairState.machine_review):
                    continue
                scores = state.scores.get(pair.id, [])
                if len(scores) >= 2:
                    continue
                if any(s["annotator_id"] == annotator_id for s in scores):
                    continue
                if ("review", annotator_id, pair.id) in self._claims:
                    continue
                self._claim("review", annotator_id, pair.id)
                return pair
            return None

    def submit_score(
        self,
        pair_id: str,
        annotator_id: str,
        score: int,
        bad_hs: bool = False,
        elapsed: float = 0.0,
        key: str | None = None,
    ) -> dict:
        """Record one judgment; aggregates the tier once the second lands."""
        with self._lock:
            state = self.state
            if key is not None and key in state.idempotency_keys:
                tier = state.tiers.get(pair_id)
                return {"pair_id": pair_id, "duplicate": True, "tier": tier}
            claim = self._release("review", annotator_id, pair_id)
            flagged = False
            if claim is not None:
                observed = self._clock() - claim.started
                flagged = elapsed > observed + ELAPSED_SLACK_S
            review = ReviewScore(
                pair_id=pair_id, annotator_id=annotator_id,
                score=score, bad_hs=bad_hs, elapsed=elapsed,
            )
            data = review.to_record() | {"elapsed_flagged": flagged}
            self.store.append(SCORED, data, key=key)
            tier_value = None
            scores = self.state.scores.get(pair_id, [])
            if len(scores) == 2:
                tier = aggregate([
                    ReviewScore(pair_id=pair_id, annotator_id=s["annotator_id"],
                                score=s["score"], bad_hs=s["bad_hs"], elapsed=s["elapsed"])
                    for s in scores
                ])
                self.store.append(
                    FILTERED, {"pair_id": pair_id, "by": "human_tier", "tier": tier.value},
                )
                tier_value = tier.value
            return {"pair_id": pair_id, "duplicate": False, "tier": tier_value}

    # -- machine review ----------------------------------------------------

    def machine_filter(
        self,
        scorer,
        threshold: float = DEFAULT_THRESHOLD,
        pair_ids: list[str] | None = None,
    ) -> dict:
        """Score candidates with a machine reviewer and log the verdicts."""
        with self._lock:
            state = self.state
            if pair_ids is None:
                targets = [
                    p for p in state.pairs.values()
                    if p.source == PairSource.generated
                    and p.state in (PairState.candidate, PairState.human_review,
                                    PairState.machine_review)
                ]
            else:
                targets = [self._get_pair(pid) for pid in pair_ids]
            n_suitable = 0
            for pair in targets:
                verdict = score_pair(pair, scorer, threshold)
                self.store.append(FILTERED, {
                    "pair_id": pair.id, "by": "machine",
                    "label": verdict.label, "confidence": verdict.confidence,
                    "scorer": verdict.scorer,
                })
                n_suitable += verdict.label == "suitable"
            return {"scored": len(targets), "suitable": n_suitable}

    # -- expert experiments -------------------------------------------------

    def _get_pair(self, pair_id: str) -> HsCnPair:
        pair = self.state.pairs.get(pair_id)
        if pair is None:
            raise UnknownId(f"no pair with id {pair_id!r}", pair_id=pair_id)
        return pair

    def create_experiment(
        self,
        configs: list[PipelineConfig],
        operators: list[str],
        pool_ids: list[str] | None = None,
    ) -> dict:
        with self._lock:
            state = self.state
            if pool_ids is None:
                pool = [
                    p for p in state.pairs.values()
                    if p.source == PairSource.generated
                    and p.state in (PairState.candidate, PairState.human_review,
                                    PairState.machine_review)
                ]
            else:
                pool = [self._get_pair(pid) for pid in pool_ids]
            if not pool:
                raise InsufficientPool("no candidates available for an experiment")
            plan = route(pool, state.tiers, state.machine, configs, operators)
            payload = plan.to_payload()
            self.store.append(EXPERIMENT_CREATED, {"experiment": payload})
            return payload

    def next_for_expert(self, operator_id: str, experiment_id: str | None = None) -> dict | None:
        """Claim the operator's next undecided assignment, in session order."""
        with self._lock:
            self._expire_claims()
            state = self.state
            experiments = (
                [state.experiments[experiment_id]]
                if experiment_id is not None and experiment_id in state.experiments
                else list(state.experiments.values())
            )
            if experiment_id is not None and not experiments:
                raise UnknownId(f"no experiment {experiment_id!r}")
            for exp in experiments:
                for item in exp["assignments"].get(operator_id, []):
                    pid = item["pair_id"]
                    if state.decision_for(exp["id"], pid) is not None:
                        continue
                    pair = state.pairs[pid]
                    if pair.state != PairState.expert_queue:
                        continue
                    if ("expert", operator_id, pid) in self._claims:
                        continue
                    self._claim("expert", operator_id, pid)
                    return {
                        "experiment_id": exp["id"],
                        "condition": item["condition"],
                        "pair": pair.to_record(),
                    }
            return None

    def submit_decision(
        self,
        experiment_id: str,
        pair_id: str,
        operator_id: str,
        action: str,
        edited_cn: str | None = None,
        elapsed: float = 0.0,
        key: str | None = None,
    ) -> dict:
        with self._lock:
            state = self.state
            if key is not None and key in state.idempotency_keys:
                existing = state.decision_for(experiment_id, pair_id) or {}
                return dict(existing, duplicate=True)
            exp = state.experiments.get(experiment_id)
            if exp is None:
                raise UnknownId(f"no experiment {experiment_id!r}", experiment_id=experiment_id)
            assigned = any(
                item["pair_id"] == pair_id
                for item in exp["assignments"].get(operator_id, [])
            )
            if not assigned:
                raise WrongState(
                    f"pair {pair_id!r} is not assigned to operator {operator_id!r}",
                    pair_id=pair_id, operator_id=operator_id,
                )
            claim = self._release("expert", operator_id, pair_id)
            flagged = False
            if claim is not None:
                observed = self._clock() - claim.started
                flagged = elapsed > observed + ELAPSED_SLACK_S
            original = self._get_pair(pair_id)
            data: dict = {
                "experiment_id": experiment_id,
                "pair_id": pair_id,
                "operator_id": operator_id,
                "action": action,
                "elapsed": elapsed,
                "elapsed_flagged": flagged,
            }
            if action == "edit":
                data["edited_cn"] = edited_cn or ""
                if edited_cn and normalize_text(edited_cn):
                    data["edit_rate"] = edit_rate(original.counter_narrative, edited_cn)
                data["new_pair_id"] = uuid.uuid4().hex
            self.store.append(VALIDATED, data, key=key)
            result = {"pair_id": pair_id, "action": action, "duplicate": False}
            if action == "edit":
                result["edit_rate"] = data["edit_rate"]
                result["new_pair_id"] = data["new_pair_id"]
            return result

    # -- reporting / export -------------------------------------------------

    def effort_report(
        self,
        experiment_id: str,
        condition: str,
        seconds_per_judgment: float = SECONDS_PER_JUDGMENT,
        judgments_per_pair: int = JUDGMENTS_PER_PAIR,
        rr_cfg: RRConfig | None = None,
    ) -> EffortReport:
        with self._lock:
            return effort_report(
                self.state, experiment_id, condition,
                seconds_per_judgment=seconds_per_judgment,
                judgments_per_pair=judgments_per_pair,
                rr_cfg=rr_cfg,
            )

    def export_accepted(self) -> list[dict]:
        """Accepted pairs; originals replaced by a post-edit are excluded."""
        with self._lock:
            state = self.state
            return [
                p.to_record() for p in state.pairs.values()
                if p.state == PairState.accepted and p.id not in state.replaced_by
            ]


def verify_conservation(state: StoreState) -> dict:
    """Check the counting invariants; raises WrongState on violation.

    Per experiment and condition: eligible is a subset of the pool,
    assignments come from eligible, and assigned = decided + pending with
    decided = validated + edited + discarded.
    """
    totals = {"experiments": 0, "assigned": 0, "decided": 0}
    for eid, exp in state.experiments.items():
        totals["experiments"] += 1
        pool = set(exp["pool_ids"])
        for condition in exp["conditions"]:
            eligible = exp["eligible"][condition]
            if not set(eligible) <= pool:
                raise WrongState(f"{eid}/{condition}: eligible pairs outside the pool")
            assigned = [
                item["pair_id"]
                for items in exp["assignments"].values()
                for item in items
                if item["condition"] == condition
            ]
            if not set(assigned) <= set(eligible):
                raise WrongState(f"{eid}/{condition}: assignment outside eligible set")
            decided = validated = edited = discarded = 0
            pending = 0
            for pid in assigned:
                decision = state.decision_for(eid, pid)
                if decision is None:
                    pending += 1
                    if state.pairs[pid].state != PairState.expert_queue:
                        raise WrongState(f"{eid}/{condition}: pending pair {pid} left expert_queue")
                    continue
                decided += 1
                action = decision["action"]
                validated += action == "validate"
                edited += action == "edit"
                discarded += action == "discard"
                expected = PairState.discarded if action == "discard" else PairState.accepted
                if state.pairs[pid].state != expected:
                    raise WrongState(f"{eid}/{condition}: pair {pid} state mismatch")
            if decided + pending != len(assigned):
                raise WrongState(f"{eid}/{condition}: assigned != decided + pending")
            if validated + edited + discarded != decided:
                raise WrongState(f"{eid}/{condition}: decision actions do not sum")
            totals["assigned"] += len(assigned)
            totals["decided"] += decided
    return totals
