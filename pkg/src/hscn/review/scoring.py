"""Non-expert review scores and threshold-tier aggregation.

Each pair collects exactly two judgments on a 0-3 scale plus a bad-HS
flag. Tiers: a bad-HS flag from either annotator dominates everything
(malformed source material is unusable no matter how good the CN); any 0
discards; both >= 2 is the high-quality tier; the remainder (both >= 1)
is usable with post-editing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from ..errors import DuplicateAnnotator, TooManyScores


class FilterTier(str, Enum):
    geq2 = "geq2"
    geq1_only = "geq1_only"
    discarded = "discarded"
    bad_hs = "bad_hs"
    pending = "pending"


# geq1_only < geq2 on quality; bad_hs sits below everything because it is
# dominant in aggregation.
TIER_ORDER = {
    FilterTier.bad_hs: 0,
    FilterTier.discarded: 1,
    FilterTier.geq1_only: 2,
    FilterTier.geq2: 3,
}


@dataclass(frozen=True)
class ReviewScore:
    pair_id: str
    annotator_id: str
    score: int  # 0: not suitable .. 3: extremely good
    bad_hs: bool = False
    elapsed: float = 0.0

    def __post_init__(self):
        if self.score not in (0, 1, 2, 3):
            raise ValueError(f"score must be in 0..3, got {self.score!r}")

    def to_record(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "annotator_id": self.annotator_id,
            "score": self.score,
            "bad_hs": self.bad_hs,
            "elapsed": self.elapsed,
        }


def aggregate(scores: Sequence[ReviewScore]) -> FilterTier:
    """Tier for one pair's judgments; fewer than two gives ``pending``."""
    if len(scores) < 2:
        return FilterTier.pending
    if len(scores) > 2:
        raise TooManyScores(f"expected two judgments, got {len(scores)}")
    first, second = scores
    if first.annotator_id == second.annotator_id:
        raise DuplicateAnnotator(
            f"both judgments from annotator {first.annotator_id!r}",
            annotator_id=first.annotator_id,
        )
    if first.bad_hs or second.bad_hs:
        return FilterTier.bad_hs
    if first.score == 0 or second.score == 0:
        return FilterTier.discarded
    if first.score >= 2 and second.score >= 2:
        return FilterTier.geq2
    return FilterTier.geq1_only


PASSING_TIERS = {
    "human_geq1": {FilterTier.geq2, FilterTier.geq1_only},
    "human_geq2": {FilterTier.geq2},
}


@dataclass
class TierReport:
    """Counts and percentages per tier over fully-annotated pairs.

    Raw counts always travel with the percentages: the denominator is the
    number of fully-annotated pairs (bad-HS included), and printing both
    keeps any denominator ambiguity visible in the output. ``geq1`` is the
    cumulative count (both annotators >= 1, i.e. geq2 + geq1_only).
    """

    counts: dict[str, int]
    total: int

    @classmethod
    def from_tiers(cls, tiers: Iterable[FilterTier | str]) -> "TierReport":
        counter = Counter(FilterTier(t) for t in tiers)
        counter.pop(FilterTier.pending, None)
        counts = {t.value: counter.get(t, 0) for t in
                  (FilterTier.geq2, FilterTier.geq1_only, FilterTier.discarded, FilterTier.bad_hs)}
        return cls(counts=counts, total=sum(counts.values()))

    @property
    def geq1_cumulative(self) -> int:
        return self.counts["geq2"] + self.counts["geq1_only"]

    def rate(self, condition: str) -> float:
        """Observed pass rate of a human filter condition."""
        if self.total == 0:
            return 0.0
        passing = sum(
            count for tier, count in self.counts.items()
            if FilterTier(tier) in PASSING_TIERS[condition]
        )
        return passing / self.total

    def percentages(self) -> dict[str, float]:
        if self.total == 0:
            return {}
        pct = {tier: 100.0 * c / self.total for tier, c in self.counts.items()}
        pct["geq1_cumulative"] = 100.0 * self.geq1_cumulative / self.total
        return pct

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts, geq1_cumulative=self.geq1_cumulative),
            "total": self.total,
            "percentages": {k: round(v, 1) for k, v in self.percentages().items()},
        }
