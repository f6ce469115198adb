"""Novelty: token-set distance between generated texts and a training corpus."""

from __future__ import annotations

from typing import Iterable, Sequence

from ..errors import EmptyCorpus, EmptyTrainingSet
from ..normalize import DEFAULT_POLICY, NormalizationPolicy, token_set

VARIANTS = ("max", "mean")


def jaccard(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union


def novelty(
    candidate: str,
    training_cns: Sequence[str],
    policy: NormalizationPolicy = DEFAULT_POLICY,
    variant: str = "max",
) -> float:
    """1 minus the similarity of ``candidate`` to the training corpus.

    ``variant="max"`` measures distance to the nearest training text (the
    default); ``"mean"`` averages the similarity over the whole corpus.
    """
    if not training_cns:
        raise EmptyTrainingSet("novelty needs at least one training text")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    cand = token_set(candidate, policy)
    sims = [jaccard(cand, token_set(t, policy)) for t in training_cns]
    agg = max(sims) if variant == "max" else sum(sims) / len(sims)
    return 1.0 - agg


def corpus_novelty(
    candidates: Iterable[str],
    training_cns: Sequence[str],
    policy: NormalizationPolicy = DEFAULT_POLICY,
    variant: str = "max",
) -> float:
    """Mean novelty over candidates."""
    if not training_cns:
        raise EmptyTrainingSet("novelty needs at least one training text")
    # reuse the tokenized training sets across candidates
    train_sets = [token_set(t, policy) for t in training_cns]
    values = []
    for cand in candidates:
        cset = token_set(cand, policy)
        sims = [jaccard(cset, ts) for ts in train_sets]
        agg = max(sims) if variant == "max" else sum(sims) / len(sims)
        values.append(1.0 - agg)
    if not values:
        raise EmptyCorpus("no candidates to score")
    return sum(values) / len(values)
