"""Effort and quality reports derived purely from the event log.

Every field is a function of store state, so replaying the same log always
reproduces the same report. Crowd time uses the observed tier rates: with
two judgments per pair at ``seconds_per_judgment`` each, obtaining one
pair that passes a filter with rate r costs (2 x 35)/r seconds of
annotator time.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import NoEvents, UnknownId
from ..events import StoreState
from ..metrics import RRConfig, corpus_novelty, repetition_rate
from ..pairs import PairSource
from ..review.scoring import TierReport
from .experiments import ReviewerMode

SECONDS_PER_JUDGMENT = 35.0
JUDGMENTS_PER_PAIR = 2
# Reported cost of writing pairs with no machine suggestion at all; prior
# work's constant, displayed for comparison, never measured here.
NO_SUGGESTION_SECONDS = 480.0

ACCEPTING_ACTIONS = ("validate", "edit")


@dataclass
class EffortReport:
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

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "condition": self.condition,
            "ngo_time_per_pair": self.ngo_time_per_pair,
            "crowd_time_per_pair": self.crowd_time_per_pair,
            "rr": self.rr,
            "novelty": self.novelty,
            "pairs_selec": self.pairs_selec,
            "pairs_final": self.pairs_final,
            "mean_hter": self.mean_hter,
            "counts": self.counts,
        }


def crowd_time_for_rate(
    rate: float,
    seconds_per_judgment: float = SECONDS_PER_JUDGMENT,
    judgments_per_pair: int = JUDGMENTS_PER_PAIR,
) -> float | None:
    if rate <= 0.0:
        return None
    return judgments_per_pair * seconds_per_judgment / rate


def effort_report(
    state: StoreState,
    experiment_id: str,
    condition: str,
    seconds_per_judgment: float = SECONDS_PER_JUDGMENT,
    judgments_per_pair: int = JUDGMENTS_PER_PAIR,
    rr_cfg: RRConfig | None = None,
    novelty_variant: str = "max",
) -> EffortReport:
    exp = state.experiments.get(experiment_id)
    if exp is None:
        raise UnknownId(f"no experiment {experiment_id!r}", experiment_id=experiment_id)
    if condition not in exp["conditions"]:
        raise UnknownId(
            f"experiment has no condition {condition!r}",
            experiment_id=experiment_id, condition=condition,
        )

    assigned = [
        item["pair_id"]
        for items in exp["assignments"].values()
        for item in items
        if item["condition"] == condition
    ]
    if not assigned:
        raise NoEvents(f"no assignments for condition {condition!r}")
    decisions = [
        (pid, state.decision_for(experiment_id, pid))
        for pid in assigned
    ]
    decided = [(pid, d) for pid, d in decisions if d is not None]

    ngo_time = None
    if decided:
        ngo_time = sum(d["elapsed"] for _, d in decided) / len(decided)

    crowd_time = None
    if condition in (ReviewerMode.human_geq1.value, ReviewerMode.human_geq2.value):
        tier_report = TierReport.from_tiers(state.tiers.values())
        crowd_time = crowd_time_for_rate(
            tier_report.rate(condition), seconds_per_judgment, judgments_per_pair,
        )

    accepted_cns: list[str] = []
    hters: list[float] = []
    n_validated = n_edited = n_discarded = 0
    for _, d in decided:
        action = d["action"]
        if action == "validate":
            n_validated += 1
            accepted_cns.append(state.pairs[d["pair_id"]].counter_narrative)
        elif action == "edit":
            n_edited += 1
            accepted_cns.append(d["edited_cn"])
            if "edit_rate" in d:
                hters.append(d["edit_rate"])
        else:
            n_discarded += 1

    pool_size = len(exp["pool_ids"])
    n_eligible = len(exp["eligible"][condition])
    pairs_selec = 100.0 * n_eligible / pool_size if pool_size else 0.0
    pairs_final = 100.0 * (n_validated + n_edited) / len(decided) if decided else None

    rr = None
    novelty = None
    if accepted_cns:
        cfg = rr_cfg or RRConfig(rng_seed=exp["configs"][condition]["rng_seed"])
        rr = repetition_rate(accepted_cns, cfg)
        training = [
            p.counter_narrative for p in state.pairs.values()
            if p.source == PairSource.seed_dataset
        ]
        if training:
            novelty = corpus_novelty(accepted_cns, training, variant=novelty_variant)

    return EffortReport(
        experiment_id=experiment_id,
        condition=condition,
        ngo_time_per_pair=ngo_time,
        crowd_time_per_pair=crowd_time,
        rr=rr,
        novelty=novelty,
        pairs_selec=pairs_selec,
        pairs_final=pairs_final,
        mean_hter=sum(hters) / len(hters) if hters else None,
        counts={
            "pool": pool_size,
            "eligible": n_eligible,
            "assigned": len(assigned),
            "decided": len(decided),
            "validated": n_validated,
            "edited": n_edited,
            "discarded": n_discarded,
        },
    )
