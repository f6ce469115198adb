"""Metric bundles and label distributions over pair collections."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

from ..errors import UnlabeledPair
from ..pairs import HsCnPair


@dataclass
class CorpusStats:
    """Computed metric bundle; fields a given run did not compute stay None."""

    n_pairs: int = 0
    rr: float | None = None
    novelty: float | None = None
    novelty_variant: str | None = None
    bleu: float | None = None
    mean_hter: float | None = None
    tier_counts: dict[str, int] | None = None
    type_distribution: dict[str, float] | None = None

    def to_json(self) -> str:
        data = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(data, sort_keys=True, ensure_ascii=False)

    def to_table(self) -> str:
        rows = []
        for key, value in sorted(asdict(self).items()):
            if value is None:
                continue
            if isinstance(value, dict):
                for sub, v in value.items():
                    rows.append((f"{key}.{sub}", v))
            else:
                rows.append((key, value))
        width = max(len(k) for k, _ in rows)
        lines = []
        for key, value in rows:
            shown = f"{value:.4f}" if isinstance(value, float) else str(value)
            lines.append(f"{key.ljust(width)}  {shown}")
        return "\n".join(lines)


def type_distribution(pairs: Sequence[HsCnPair]) -> dict[str, float]:
    """Percentage of each CN type over a labeled sample."""
    if not pairs:
        return {}
    counts: dict[str, int] = {}
    for pair in pairs:
        if pair.cn_type is None:
            raise UnlabeledPair("pair has no cn_type label", pair_id=pair.id)
        counts[pair.cn_type.value] = counts.get(pair.cn_type.value, 0) + 1
    total = len(pairs)
    return {name: 100.0 * count / total for name, count in sorted(counts.items())}
