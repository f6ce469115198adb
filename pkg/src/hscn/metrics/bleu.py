"""Corpus-level BLEU with uniform 4-gram weights and brevity penalty.

Modified n-gram precisions are clipped against the best reference count
and pooled over the corpus before combining. Smoothing: a higher-order
precision (n >= 2) whose match count is zero gets 1 added to numerator
and denominator, so short toy corpora do not collapse to zero; a corpus
with zero unigram matches scores 0.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

from ..errors import EmptyCorpus, MissingReference
from ..normalize import DEFAULT_POLICY, NormalizationPolicy, tokens


def _ngrams(toks: list[str], n: int) -> Counter:
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def _closest_ref_len(cand_len: int, ref_lens: list[int]) -> int:
    # ties break toward the shorter reference
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def corpus_bleu(
    candidates: Sequence[str],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> float:
    """BLEU in [0, 1] for ``candidates[i]`` against ``references[i]``."""
    if not candidates:
        raise EmptyCorpus("no candidates")
    if len(references) != len(candidates):
        raise MissingReference(
            f"{len(candidates)} candidates but {len(references)} reference lists"
        )
    matches = [0] * (max_n + 1)
    totals = [0] * (max_n + 1)
    cand_len = 0
    ref_len = 0
    for i, (cand, refs) in enumerate(zip(candidates, references)):
        if not refs:
            raise MissingReference(f"candidate {i} has no references", index=i)
        cand_toks = tokens(cand, policy)
        ref_toks = [tokens(r, policy) for r in refs]
        cand_len += len(cand_toks)
        ref_len += _closest_ref_len(len(cand_toks), [len(r) for r in ref_toks])
        for n in range(1, max_n + 1):
            cand_counts = _ngrams(cand_toks, n)
            if not cand_counts:
                continue
            max_ref: Counter = Counter()
            for rt in ref_toks:
                for gram, count in _ngrams(rt, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            totals[n] += sum(cand_counts.values())
            matches[n] += sum(min(c, max_ref[g]) for g, c in cand_counts.items())
    if cand_len == 0 or matches[1] == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        num, den = matches[n], totals[n]
        if n >= 2 and num == 0:
            num, den = num + 1, den + 1
        log_sum += math.log(num / den)
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_sum / max_n)
