"""Training-set construction for the pair classifier.

Positives: seed pairs plus the high-agreement (geq2) tier. Negatives: the
"at least one 0" tier plus two synthetic families that teach the model
cheap failure modes - verbatim HS-HS echoes, and random HSs paired as if
they were CNs. A manifest records provenance counts so the mix is
auditable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import InsufficientPool
from ..events import StoreState
from ..pairs import HsCnPair, PairSource
from .scoring import FilterTier

SUITABLE = "suitable"
UNSUITABLE = "unsuitable"

PROV_SEED = "seed_positive"
PROV_GEQ2 = "geq2_positive"
PROV_ZERO = "zero_negative"
PROV_ECHO = "echo_negative"
PROV_RANDOM_HS = "random_hs_negative"


@dataclass(frozen=True)
class ClassifierDatasetSpec:
    verbatim_negatives: int = 50
    random_pair_negatives: int = 50
    balance: bool = True
    rng_seed: int = 0


@dataclass(frozen=True)
class LabeledPair:
    hs: str
    cn: str
    label: str
    provenance: str

    def to_record(self) -> dict:
        return {"hs": self.hs, "cn": self.cn, "label": self.label, "provenance": self.provenance}

    @classmethod
    def from_record(cls, rec: dict) -> "LabeledPair":
        return cls(hs=rec["hs"], cn=rec["cn"], label=rec["label"], provenance=rec.get("provenance", ""))


@dataclass
class DatasetManifest:
    provenance_counts: dict[str, int] = field(default_factory=dict)
    n_positive: int = 0
    n_negative: int = 0
    rng_seed: int = 0

    @property
    def total(self) -> int:
        return self.n_positive + self.n_negative

    def to_dict(self) -> dict:
        return {
            "provenance_counts": dict(sorted(self.provenance_counts.items())),
            "n_positive": self.n_positive,
            "n_negative": self.n_negative,
            "total": self.total,
            "rng_seed": self.rng_seed,
        }


def build_classifier_dataset(
    positives: Sequence[HsCnPair],
    zero_tier_negatives: Sequence[HsCnPair],
    hs_pool: Sequence[str],
    spec: ClassifierDatasetSpec = ClassifierDatasetSpec(),
    positive_provenance: dict[str, str] | None = None,
) -> tuple[list[LabeledPair], DatasetManifest]:
    """Assemble the labeled set from explicit pools.

    ``positive_provenance`` maps pair id to a provenance tag (defaults to
    the pair's source). Synthetic negatives draw from ``hs_pool`` with the
    spec's seeded RNG; shortfalls raise InsufficientPool naming the pool.
    """
    rng = random.Random(spec.rng_seed)
    if not positives:
        raise InsufficientPool("no positive examples available", pool="positives")
    need_hs = max(spec.verbatim_negatives, spec.random_pair_negatives)
    if need_hs and len(hs_pool) < 2:
        raise InsufficientPool(
            "hs_pool too small for synthetic negatives",
            pool="hs_pool", available=len(hs_pool), needed=max(2, need_hs),
        )

    prov = positive_provenance or {}
    pos = [
        LabeledPair(
            hs=p.hate_speech, cn=p.counter_narrative, label=SUITABLE,
            provenance=prov.get(p.id, PROV_SEED if p.source == PairSource.seed_dataset else PROV_GEQ2),
        )
        for p in positives
    ]
    neg = [
        LabeledPair(hs=p.hate_speech, cn=p.counter_narrative, label=UNSUITABLE, provenance=PROV_ZERO)
        for p in zero_tier_negatives
    ]
    for _ in range(spec.verbatim_negatives):
        hs = rng.choice(list(hs_pool))
        neg.append(LabeledPair(hs=hs, cn=hs, label=UNSUITABLE, provenance=PROV_ECHO))
    for _ in range(spec.random_pair_negatives):
        hs, other = rng.sample(list(hs_pool), 2)
        neg.append(LabeledPair(hs=hs, cn=other, label=UNSUITABLE, provenance=PROV_RANDOM_HS))

    if spec.balance:
        k = min(len(pos), len(neg))
        if len(pos) > k:
            pos = rng.sample(pos, k)
        if len(neg) > k:
            neg = rng.sample(neg, k)

    dataset = pos + neg
    rng.shuffle(dataset)
    manifest = DatasetManifest(rng_seed=spec.rng_seed)
    for item in dataset:
        manifest.provenance_counts[item.provenance] = manifest.provenance_counts.get(item.provenance, 0) + 1
        if item.label == SUITABLE:
            manifest.n_positive += 1
        else:
            manifest.n_negative += 1
    return dataset, manifest


def dataset_from_store(
    state: StoreState,
    spec: ClassifierDatasetSpec = ClassifierDatasetSpec(),
) -> tuple[list[LabeledPair], DatasetManifest]:
    """Pool assembly straight from a store snapshot."""
    seed_pairs = [p for p in state.pairs.values() if p.source == PairSource.seed_dataset]
    geq2 = [
        state.pairs[pid] for pid, tier in state.tiers.items()
        if tier == FilterTier.geq2.value
    ]
    zeros = [
        state.pairs[pid] for pid, tier in state.tiers.items()
        if tier == FilterTier.discarded.value
    ]
    prov = {p.id: PROV_SEED for p in seed_pairs} | {p.id: PROV_GEQ2 for p in geq2}
    hs_pool = [p.hate_speech for p in seed_pairs] or [p.hate_speech for p in state.pairs.values()]
    return build_classifier_dataset(seed_pairs + geq2, zeros, hs_pool, spec, positive_provenance=prov)


def read_labeled_jsonl(path: str | Path) -> list[LabeledPair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(LabeledPair.from_record(json.loads(line)))
    return out


def write_labeled_jsonl(dataset: Iterable[LabeledPair], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for item in dataset:
            fh.write(json.dumps(item.to_record(), ensure_ascii=False) + "\n")
            count += 1
    return count
