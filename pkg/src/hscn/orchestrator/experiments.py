"""Condition routing and session assignment for expert experiments.

A routing plan filters the candidate pool per reviewer condition, samples
operator sessions (stratified over tier labels by default, proportions
preserved to within one item), and fixes a seeded-random condition order
per operator. A pair is assigned at most once within an experiment.
"""

from __future__ import annotations

import hashlib
import math
import random
import uuid
from dataclasses import dataclass
from enum import Enum

from ..errors import DuplicateId, InsufficientPool
from ..pairs import HsCnPair
from ..review.scoring import FilterTier, PASSING_TIERS
from ..review.dataset import SUITABLE


class ReviewerMode(str, Enum):
    expert_direct = "expert_direct"
    human_geq1 = "human_geq1"
    human_geq2 = "human_geq2"
    machine = "machine"


class SamplingMode(str, Enum):
    stratified = "stratified"
    uniform = "uniform"


@dataclass(frozen=True)
class PipelineConfig:
    reviewer_mode: ReviewerMode
    sampling: SamplingMode = SamplingMode.stratified
    session_size: int = 20
    rng_seed: int = 0

    def to_dict(self) -> dict:
        return {
            "reviewer_mode": self.reviewer_mode.value,
            "sampling": self.sampling.value,
            "session_size": self.session_size,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(
            reviewer_mode=ReviewerMode(d["reviewer_mode"]),
            sampling=SamplingMode(d.get("sampling", "stratified")),
            session_size=d.get("session_size", 20),
            rng_seed=d.get("rng_seed", 0),
        )


def eligible_ids(
    pool: list[HsCnPair],
    tiers: dict[str, str],
    machine: dict[str, dict],
    mode: ReviewerMode,
) -> list[str]:
    """Pool members passing the condition's filter, in pool order."""
    if mode == ReviewerMode.expert_direct:
        return [p.id for p in pool]
    if mode == ReviewerMode.machine:
        return [p.id for p in pool if machine.get(p.id, {}).get("label") == SUITABLE]
    passing = {t.value for t in PASSING_TIERS[mode.value]}
    return [p.id for p in pool if tiers.get(p.id) in passing]


def _operator_seed(rng_seed: int, operator: str) -> int:
    digest = hashlib.sha256(f"{rng_seed}\x00{operator}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stratified_sample(
    items: list[tuple[str, str]],
    k: int,
    rng: random.Random,
) -> list[str]:
    """k ids sampled with per-stratum proportions preserved to within 1.

    Largest-remainder allocation over the stratum sizes, then a seeded
    uniform draw inside each stratum.
    """
    if k > len(items):
        raise InsufficientPool("sample larger than population", needed=k, available=len(items))
    strata: dict[str, list[str]] = {}
    for item_id, stratum in items:
        strata.setdefault(stratum, []).append(item_id)
    total = len(items)
    quotas = {s: k * len(members) / total for s, members in strata.items()}
    alloc = {s: math.floor(q) for s, q in quotas.items()}
    leftover = k - sum(alloc.values())
    by_remainder = sorted(strata, key=lambda s: (-(quotas[s] - alloc[s]), s))
    for s in by_remainder[:leftover]:
        alloc[s] += 1
    # floor+1 can exceed a small stratum; push overflow to the others
    overflow = 0
    for s in sorted(strata):
        if alloc[s] > len(strata[s]):
            overflow += alloc[s] - len(strata[s])
            alloc[s] = len(strata[s])
    for s in by_remainder:
        while overflow and alloc[s] < len(strata[s]):
            alloc[s] += 1
            overflow -= 1
    chosen: list[str] = []
    for s in sorted(strata):
        chosen.extend(rng.sample(strata[s], alloc[s]))
    rng.shuffle(chosen)
    return chosen


@dataclass
class RoutingPlan:
    experiment_id: str
    configs: list[PipelineConfig]
    operators: list[str]
    pool_ids: list[str]
    eligible: dict[str, list[str]]            # condition -> pool ids passing its filter
    assignments: dict[str, list[dict]]        # operator -> ordered [{condition, pair_id}]

    def to_payload(self) -> dict:
        return {
            "id": self.experiment_id,
            "configs": {c.reviewer_mode.value: c.to_dict() for c in self.configs},
            "conditions": [c.reviewer_mode.value for c in self.configs],
            "operators": self.operators,
            "pool_ids": self.pool_ids,
            "eligible": self.eligible,
            "assignments": self.assignments,
        }


def route(
    pool: list[HsCnPair],
    tiers: dict[str, str],
    machine: dict[str, dict],
    configs: list[PipelineConfig],
    operators: list[str],
    experiment_id: str | None = None,
) -> RoutingPlan:
    """Build per-condition queues and operator sessions over a pool snapshot."""
    if not configs:
        raise InsufficientPool("experiment needs at least one condition")
    if not operators:
        raise InsufficientPool("experiment needs at least one operator")
    modes = [c.reviewer_mode.value for c in configs]
    if len(set(modes)) != len(modes):
        raise DuplicateId("conditions must be distinct within an experiment")

    eid = experiment_id or uuid.uuid4().hex
    eligible: dict[str, list[str]] = {}
    per_condition_samples: dict[str, list[str]] = {}
    used: set[str] = set()
    for cfg in configs:
        mode = cfg.reviewer_mode
        ids = eligible_ids(pool, tiers, machine, mode)
        eligible[mode.value] = ids
        available = [i for i in ids if i not in used]
        needed = cfg.session_size * len(operators)
        if len(available) < needed:
            raise InsufficientPool(
                f"condition {mode.value}: need {needed} unassigned eligible pairs, "
                f"have {len(available)}",
                condition=mode.value, needed=needed, available=len(available),
            )
        rng = random.Random(cfg.rng_seed)
        if cfg.sampling == SamplingMode.stratified:
            labeled = [(i, tiers.get(i, "unscored")) for i in available]
            sample = stratified_sample(labeled, needed, rng)
        else:
            sample = rng.sample(available, needed)
        per_condition_samples[mode.value] = sample
        used.update(sample)

    assignments: dict[str, list[dict]] = {}
    for op_index, operator in enumerate(operators):
        op_rng = random.Random(_operator_seed(configs[0].rng_seed, operator))
        order = list(configs)
        op_rng.shuffle(order)
        items: list[dict] = []
        for cfg in order:
            sample = per_condition_samples[cfg.reviewer_mode.value]
            start = op_index * cfg.session_size
            for pid in sample[start:start + cfg.session_size]:
                items.append({"condition": cfg.reviewer_mode.value, "pair_id": pid})
        assignments[operator] = items

    return RoutingPlan(
        experiment_id=eid,
        configs=list(configs),
        operators=list(operators),
        pool_ids=[p.id for p in pool],
        eligible=eligible,
        assignments=assignments,
    )
