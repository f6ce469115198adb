"""Word-level edit rate between a machine text and its post-edited version.

Minimum insert/delete/substitute edits at unit cost, divided by the word
count of the post-edited text. Block shifts are not modelled, so the value
upper-bounds shift-aware edit rates; it is used as a coarse effort band,
not a fine-grained score.
"""

from __future__ import annotations

from ..errors import EmptyReference
from ..normalize import DEFAULT_POLICY, NormalizationPolicy, tokens


def word_edit_distance(a: list[str], b: list[str]) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, wa in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, wb in enumerate(b, start=1):
            cost = 0 if wa == wb else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[len(b)]


def edit_rate(
    machine_cn: str,
    postedited_cn: str,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> float:
    ref = tokens(postedited_cn, policy)
    if not ref:
        raise EmptyReference("post-edited text has no tokens")
    hyp = tokens(machine_cn, policy)
    return word_edit_distance(hyp, ref) / len(ref)
