"""Pair data model, token-marker serialization, and deduplication.

A pair is one hate-speech text plus one counter-narrative text. Pairs are
immutable values; lifecycle changes produce new instances via
``dataclasses.replace`` so they stay safe to share across threads.

The marker serialization is the wire format author backends consume and
produce: ``hs_start HS hs_end cn_start CN cn_end`` with single-space joins.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyField, MarkerCollision, WrongState
from .normalize import DEFAULT_POLICY, NormalizationPolicy, normalize_text


class PairSource(str, Enum):
    seed_dataset = "seed_dataset"
    generated = "generated"
    post_edited = "post_edited"


class CnType(str, Enum):
    hostile = "hostile"
    denouncing = "denouncing"
    denouncing_plus_other = "denouncing_plus_other"
    fact = "fact"
    other = "other"


class PairState(str, Enum):
    candidate = "candidate"
    human_review = "human_review"
    machine_review = "machine_review"
    expert_queue = "expert_queue"
    accepted = "accepted"
    discarded = "discarded"


# Lifecycle only moves forward; the two review states share a rank because a
# pair may be scored by humans and a machine in either order.
_STATE_RANK = {
    PairState.candidate: 0,
    PairState.human_review: 1,
    PairState.machine_review: 1,
    PairState.expert_queue: 2,
    PairState.accepted: 3,
    PairState.discarded: 3,
}

_TERMINAL = {PairState.accepted, PairState.discarded}


def check_transition(current: PairState, new: PairState) -> None:
    """Raise WrongState unless ``current -> new`` moves forward."""
    if current == new:
        return
    if current in _TERMINAL:
        raise WrongState(
            f"pair is {current.value}; no further transitions allowed",
            current=current.value, requested=new.value,
        )
    if _STATE_RANK[new] < _STATE_RANK[current]:
        raise WrongState(
            f"cannot move back from {current.value} to {new.value}",
            current=current.value, requested=new.value,
        )


def new_pair_id() -> str:
    return uuid.uuid4().hex


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class HsCnPair:
    """One HS-CN pair with provenance and lifecycle state."""

    hate_speech: str
    counter_narrative: str
    id: str = field(default_factory=new_pair_id)
    source: PairSource = PairSource.generated
    cn_type: CnType | None = None
    state: PairState = PairState.candidate
    created_at: str = field(default_factory=utc_now_iso)
    # For post_edited pairs: id of the generated pair this one replaces.
    replaces_id: str | None = None

    def __post_init__(self):
        if not normalize_text(self.hate_speech):
            raise EmptyField("hate_speech is empty after normalization", pair_id=self.id)
        if not normalize_text(self.counter_narrative):
            raise EmptyField("counter_narrative is empty after normalization", pair_id=self.id)
        if self.source == PairSource.post_edited and not self.replaces_id:
            raise EmptyField("post_edited pair must reference the pair it replaces", pair_id=self.id)

    def with_state(self, new: PairState) -> "HsCnPair":
        check_transition(self.state, new)
        return replace(self, state=new)

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "hs": self.hate_speech,
            "cn": self.counter_narrative,
            "source": self.source.value,
            "state": self.state.value,
            "created_at": self.created_at,
        }
        if self.cn_type is not None:
            rec["cn_type"] = self.cn_type.value
        if self.replaces_id is not None:
            rec["replaces_id"] = self.replaces_id
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "HsCnPair":
        return cls(
            hate_speech=rec["hs"],
            counter_narrative=rec["cn"],
            id=rec.get("id") or new_pair_id(),
            source=PairSource(rec.get("source", "generated")),
            cn_type=CnType(rec["cn_type"]) if rec.get("cn_type") else None,
            state=PairState(rec.get("state", "candidate")),
            created_at=rec.get("created_at") or utc_now_iso(),
            replaces_id=rec.get("replaces_id"),
        )


@dataclass(frozen=True)
class MarkerFormat:
    hs_start: str = "<|HS|>"
    hs_end: str = "<|endHS|>"
    cn_start: str = "<|CN|>"
    cn_end: str = "<|endCN|>"

    def __post_init__(self):
        toks = (self.hs_start, self.hs_end, self.cn_start, self.cn_end)
        if any(not t or t != t.strip() for t in toks):
            raise EmptyField("marker tokens must be non-empty and unpadded")
        if len(set(toks)) != 4:
            raise MarkerCollision("marker tokens must be pairwise distinct", markers=list(toks))

    @property
    def all(self) -> tuple[str, str, str, str]:
        return (self.hs_start, self.hs_end, self.cn_start, self.cn_end)


DEFAULT_MARKERS = MarkerFormat()


def serialize_pair(pair: HsCnPair, fmt: MarkerFormat = DEFAULT_MARKERS) -> str:
    """Marker-format text for one pair.

    Round-trips through ``parse_stream`` exactly when the pair text carries
    no leading/trailing whitespace (the parser strips block boundaries).
    """
    for name, text in (("hate_speech", pair.hate_speech), ("counter_narrative", pair.counter_narrative)):
        if not normalize_text(text):
            raise EmptyField(f"{name} is empty", pair_id=pair.id)
        for marker in fmt.all:
            if marker in text:
                raise MarkerCollision(
                    f"marker {marker!r} occurs inside {name}", pair_id=pair.id, marker=marker,
                )
    return " ".join(
        (fmt.hs_start, pair.hate_speech, fmt.hs_end, fmt.cn_start, pair.counter_narrative, fmt.cn_end)
    )


def serialize_corpus(pairs: Iterable[HsCnPair], fmt: MarkerFormat = DEFAULT_MARKERS) -> str:
    return "\n".join(serialize_pair(p, fmt) for p in pairs)


@dataclass(frozen=True)
class ParsedBlock:
    """One well-formed block from a marker stream.

    ``hs`` is None for a leading CN-only block (the conditioned-generation
    case where the prompt carried the HS).
    """

    cn: str
    hs: str | None = None
    start: int = 0
    end: int = 0

    @property
    def is_pair(self) -> bool:
        return self.hs is not None


@dataclass(frozen=True)
class Fragment:
    text: str
    reason: str
    start: int = 0
    end: int = 0


@dataclass
class ParseResult:
    blocks: list[ParsedBlock]
    fragments: list[Fragment]

    def pairs(
        self,
        source: PairSource = PairSource.generated,
        cn_only_hs: str | None = None,
    ) -> list[HsCnPair]:
        """Materialize blocks as pairs; CN-only blocks need ``cn_only_hs``."""
        out = []
        for block in self.blocks:
            hs = block.hs if block.hs is not None else cn_only_hs
            if hs is None:
                continue
            out.append(HsCnPair(hate_speech=hs, counter_narrative=block.cn, source=source))
        return out


def _find_markers(raw: str, fmt: MarkerFormat) -> list[tuple[int, int, str]]:
    """All marker occurrences as (start, end, kind), non-overlapping.

    Overlaps (possible with adversarial custom markers) resolve leftmost
    first, longest on ties, which keeps scanning deterministic.
    """
    kinds = {"hs_start": fmt.hs_start, "hs_end": fmt.hs_end, "cn_start": fmt.cn_start, "cn_end": fmt.cn_end}
    hits: list[tuple[int, int, str]] = []
    for kind, marker in kinds.items():
        pos = raw.find(marker)
        while pos != -1:
            hits.append((pos, pos + len(marker), kind))
            pos = raw.find(marker, pos + 1)
    hits.sort(key=lambda h: (h[0], -(h[1] - h[0])))
    selected: list[tuple[int, int, str]] = []
    cursor = -1
    for start, end, kind in hits:
        if start >= cursor:
            selected.append((start, end, kind))
            cursor = end
    return selected


def parse_stream(raw: str, fmt: MarkerFormat = DEFAULT_MARKERS) -> ParseResult:
    """Extract every maximal well-formed block from arbitrary model output.

    Never raises: malformed spans degrade to fragments with a reason, so
    truncated or mutated generations lose pairs but are always accounted
    for. A CN block opening at the head of the stream (before any HS
    marker) is returned as a CN-only block.
    """
    markers = _find_markers(raw, fmt)
    blocks: list[ParsedBlock] = []
    fragments: list[Fragment] = []

    def add_fragment(start: int, end: int, reason: str) -> None:
        text = raw[start:end]
        if text.strip():
            fragments.append(Fragment(text=text, reason=reason, start=start, end=end))

    def clean(segment: str) -> str | None:
        """Block text must be non-empty after normalization and marker-free."""
        stripped = segment.strip()
        if not normalize_text(stripped):
            return None
        if any(m in stripped for m in fmt.all):
            return None
        return stripped

    i = 0
    n = len(markers)
    cursor = 0          # consumed up to this raw offset
    at_head = True      # still eligible for a leading CN-only block

    while i < n:
        start, end, kind = markers[i]
        add_fragment(cursor, start, "stray text")
        if kind == "hs_start":
            at_head = False
            # expect: hs_end cn_start cn_end
            if i + 3 < n and [m[2] for m in markers[i + 1:i + 4]] == ["hs_end", "cn_start", "cn_end"]:
                hs_text = clean(raw[end:markers[i + 1][0]])
                cn_text = clean(raw[markers[i + 2][1]:markers[i + 3][0]])
                gap = raw[markers[i + 1][1]:markers[i + 2][0]]
                if hs_text is not None and cn_text is not None and not gap.strip():
                    blocks.append(ParsedBlock(cn=cn_text, hs=hs_text, start=start, end=markers[i + 3][1]))
                else:
                    add_fragment(start, markers[i + 3][1], "malformed block")
                cursor = markers[i + 3][1]
                i += 4
                continue
            # truncated or out-of-order: consume up to (not including) the
            # next hs_start so the parser can resync there
            j = i + 1
            while j < n and markers[j][2] != "hs_start":
                j += 1
            stop = markers[j][0] if j < n else len(raw)
            add_fragment(start, stop, "truncated block")
            cursor = stop
            i = j
        elif kind == "cn_start" and at_head:
            at_head = False
            if i + 1 < n and markers[i + 1][2] == "cn_end":
                cn_text = clean(raw[end:markers[i + 1][0]])
                if cn_text is not None:
                    blocks.append(ParsedBlock(cn=cn_text, hs=None, start=start, end=markers[i + 1][1]))
                else:
                    add_fragment(start, markers[i + 1][1], "malformed block")
                cursor = markers[i + 1][1]
                i += 2
            else:
                j = i + 1
                while j < n and markers[j][2] != "hs_start":
                    j += 1
                stop = markers[j][0] if j < n else len(raw)
                add_fragment(start, stop, "truncated block")
                cursor = stop
                i = j
        else:
            at_head = False
            add_fragment(start, end, "unexpected marker")
            cursor = end
            i += 1

    add_fragment(cursor, len(raw), "trailing text")
    return ParseResult(blocks=blocks, fragments=fragments)


def dedup(
    pairs: Sequence[HsCnPair],
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> list[HsCnPair]:
    """Drop pairs whose CN repeats an earlier one; first occurrence wins."""
    seen: set[str] = set()
    kept = []
    for pair in pairs:
        key = normalize_text(pair.counter_narrative, policy)
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    return kept


def read_pairs_jsonl(path: str | Path) -> list[HsCnPair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(HsCnPair.from_record(json.loads(line)))
    return out


def write_pairs_jsonl(pairs: Iterable[HsCnPair], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_record(), ensure_ascii=False) + "\n")
            count += 1
    return count
