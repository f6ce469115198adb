"""Append-only event log with snapshot replay.

Every durable mutation in the pipeline is one event; the full store state
is a pure fold over the log, so replaying any prefix reproduces the state
at that point in time exactly. Events are line-delimited JSON in
``events.jsonl``; ``snapshot.json`` is a periodic checkpoint that only
shortens replay on open.

Events are validated *before* they are written: `_check_event` raises and
leaves both the log and the in-memory state untouched, `_mutate_state`
cannot fail. One writer at a time (the engine serializes appends); reads
are safe from any thread.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import (
    DuplicateAnnotator,
    DuplicateId,
    EmptyEdit,
    StorageError,
    TooManyScores,
    UnknownId,
    WrongState,
)
from .normalize import normalize_text
from .pairs import HsCnPair, PairSource, PairState, check_transition, utc_now_iso

EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"

# Event kinds, mirroring the pipeline lifecycle.
GENERATED = "generated"              # a pair entered the store
SCORED = "scored"                    # one non-expert judgment
FILTERED = "filtered"                # tier assignment or machine verdict
EXPERIMENT_CREATED = "experiment_created"  # routing plan, incl. assignments
VALIDATED = "validated"              # expert decision (validate/edit/discard)

KINDS = (GENERATED, SCORED, FILTERED, EXPERIMENT_CREATED, VALIDATED)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class PipelineEvent:
    seq: int
    kind: str
    at: str
    data: dict
    key: str | None = None

    def to_line(self) -> str:
        rec = {"seq": self.seq, "kind": self.kind, "at": self.at, "data": self.data}
        if self.key is not None:
            rec["key"] = self.key
        return canonical_json(rec)

    @classmethod
    def from_line(cls, line: str) -> "PipelineEvent":
        rec = json.loads(line)
        return cls(seq=rec["seq"], kind=rec["kind"], at=rec["at"], data=rec["data"], key=rec.get("key"))


@dataclass
class StoreState:
    """Full derived state: a fold of the event log."""

    pairs: dict[str, HsCnPair] = field(default_factory=dict)
    scores: dict[str, list[dict]] = field(default_factory=dict)
    tiers: dict[str, str] = field(default_factory=dict)
    machine: dict[str, dict] = field(default_factory=dict)
    experiments: dict[str, dict] = field(default_factory=dict)
    decisions: dict[str, dict] = field(default_factory=dict)  # "eid:pair_id" -> payload
    replaced_by: dict[str, str] = field(default_factory=dict)  # original -> post-edited id
    idempotency_keys: dict[str, int] = field(default_factory=dict)
    last_seq: int = 0

    def decision_for(self, experiment_id: str, pair_id: str) -> dict | None:
        return self.decisions.get(f"{experiment_id}:{pair_id}")

    def to_snapshot(self) -> dict:
        return {
            "last_seq": self.last_seq,
            "pairs": [p.to_record() for p in self.pairs.values()],
            "scores": self.scores,
            "tiers": self.tiers,
            "machine": self.machine,
            "experiments": self.experiments,
            "decisions": self.decisions,
            "replaced_by": self.replaced_by,
            "idempotency_keys": self.idempotency_keys,
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "StoreState":
        state = cls(
            scores={k: list(v) for k, v in snap.get("scores", {}).items()},
            tiers=dict(snap.get("tiers", {})),
            machine=dict(snap.get("machine", {})),
            experiments=snap.get("experiments", {}),
            decisions=snap.get("decisions", {}),
            replaced_by=dict(snap.get("replaced_by", {})),
            idempotency_keys=dict(snap.get("idempotency_keys", {})),
            last_seq=snap.get("last_seq", 0),
        )
        for rec in snap.get("pairs", []):
            pair = HsCnPair.from_record(rec)
            state.pairs[pair.id] = pair
        return state

    def export_canonical(self) -> str:
        return canonical_json(self.to_snapshot())


def _require_pair(state: StoreState, pair_id: str) -> HsCnPair:
    pair = state.pairs.get(pair_id)
    if pair is None:
        raise UnknownId(f"no pair with id {pair_id!r}", pair_id=pair_id)
    return pair


def _check_event(state: StoreState, event: PipelineEvent) -> None:
    data = event.data
    if event.kind == GENERATED:
        pair = HsCnPair.from_record(data["pair"])
        if pair.id in state.pairs:
            raise DuplicateId(f"pair id {pair.id!r} already in store", pair_id=pair.id)
    elif event.kind == SCORED:
        pair = _require_pair(state, data["pair_id"])
        check_transition(pair.state, PairState.human_review)
        existing = state.scores.get(pair.id, [])
        if len(existing) >= 2:
            raise TooManyScores(
                "pair already has two judgments", pair_id=pair.id,
            )
        if any(s["annotator_id"] == data["annotator_id"] for s in existing):
            raise DuplicateAnnotator(
                f"annotator {data['annotator_id']!r} already scored this pair",
                pair_id=pair.id, annotator_id=data["annotator_id"],
            )
        if data["score"] not in (0, 1, 2, 3):
            raise WrongState(f"score must be 0..3, got {data['score']!r}")
    elif event.kind == FILTERED:
        pair = _require_pair(state, data["pair_id"])
        if data["by"] == "machine":
            check_transition(pair.state, PairState.machine_review)
    elif event.kind == EXPERIMENT_CREATED:
        exp = data["experiment"]
        if exp["id"] in state.experiments:
            raise DuplicateId(f"experiment id {exp['id']!r} already exists")
        seen: set[str] = set()
        for items in exp["assignments"].values():
            for item in items:
                pid = item["pair_id"]
                pair = _require_pair(state, pid)
                check_transition(pair.state, PairState.expert_queue)
                if pid in seen:
                    raise DuplicateId(
                        "pair assigned twice within one experiment", pair_id=pid,
                    )
                seen.add(pid)
        for pid in exp.get("pool_ids", []):
            _require_pair(state, pid)
    elif event.kind == VALIDATED:
        eid = data["experiment_id"]
        if eid not in state.experiments:
            raise UnknownId(f"no experiment with id {eid!r}", experiment_id=eid)
        pair = _require_pair(state, data["pair_id"])
        if pair.state != PairState.expert_queue:
            raise WrongState(
                f"pair is {pair.state.value}, expected expert_queue", pair_id=pair.id,
            )
        if state.decision_for(eid, pair.id) is not None:
            raise DuplicateId("decision already recorded for this pair", pair_id=pair.id)
        action = data["action"]
        if action not in ("validate", "edit", "discard"):
            raise WrongState(f"unknown action {action!r}")
        if action == "edit":
            edited = data.get("edited_cn") or ""
            if not normalize_text(edited):
                raise EmptyEdit("edited_cn is empty", pair_id=pair.id)
            if normalize_text(edited) == normalize_text(pair.counter_narrative):
                raise EmptyEdit(
                    "edited_cn equals the original after normalization", pair_id=pair.id,
                )
            new_id = data.get("new_pair_id")
            if not new_id or new_id in state.pairs:
                raise DuplicateId("edit needs a fresh new_pair_id", new_pair_id=new_id)
    else:
        raise WrongState(f"unknown event kind {event.kind!r}")


def _mutate_state(state: StoreState, event: PipelineEvent) -> None:
    data = event.data
    if event.kind == GENERATED:
        pair = HsCnPair.from_record(data["pair"])
        state.pairs[pair.id] = pair
    elif event.kind == SCORED:
        pid = data["pair_id"]
        state.scores.setdefault(pid, []).append(
            {k: data[k] for k in ("annotator_id", "score", "bad_hs", "elapsed")}
        )
        state.pairs[pid] = state.pairs[pid].with_state(PairState.human_review)
    elif event.kind == FILTERED:
        pid = data["pair_id"]
        if data["by"] == "machine":
            state.machine[pid] = {
                k: data[k] for k in ("label", "confidence", "scorer") if k in data
            }
            state.pairs[pid] = state.pairs[pid].with_state(PairState.machine_review)
        else:
            state.tiers[pid] = data["tier"]
    elif event.kind == EXPERIMENT_CREATED:
        exp = data["experiment"]
        state.experiments[exp["id"]] = exp
        for items in exp["assignments"].values():
            for item in items:
                pid = item["pair_id"]
                state.pairs[pid] = state.pairs[pid].with_state(PairState.expert_queue)
    elif event.kind == VALIDATED:
        eid, pid = data["experiment_id"], data["pair_id"]
        state.decisions[f"{eid}:{pid}"] = {
            k: v for k, v in data.items() if k not in ("experiment_id", "pair_id")
        } | {"pair_id": pid}
        action = data["action"]
        original = state.pairs[pid]
        if action == "discard":
            state.pairs[pid] = original.with_state(PairState.discarded)
        else:
            state.pairs[pid] = original.with_state(PairState.accepted)
            if action == "edit":
                edited = HsCnPair(
                    hate_speech=original.hate_speech,
                    counter_narrative=data["edited_cn"],
                    id=data["new_pair_id"],
                    source=PairSource.post_edited,
                    cn_type=original.cn_type,
                    state=PairState.accepted,
                    created_at=event.at,
                    replaces_id=pid,
                )
                state.pairs[edited.id] = edited
                state.replaced_by[pid] = edited.id
    state.last_seq = event.seq
    if event.key is not None:
        state.idempotency_keys[event.key] = event.seq


def replay(events: Iterable[PipelineEvent], state: StoreState | None = None) -> StoreState:
    """Fold events into a state; pure apart from the passed-in state."""
    state = state or StoreState()
    for event in events:
        _check_event(state, event)
        _mutate_state(state, event)
    return state


class Store:
    """Event log plus its derived state.

    ``directory=None`` keeps everything in memory (tests, dry runs);
    otherwise events are appended to ``events.jsonl`` and ``checkpoint()``
    writes ``snapshot.json``.
    """

    def __init__(self, directory: str | Path | None = None):
        self._dir = Path(directory) if directory is not None else None
        self._events: list[PipelineEvent] = []
        self._state = StoreState()
        self._lock = threading.RLock()
        self._fh = None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load_existing()
            try:
                self._fh = open(self._dir / EVENTS_FILE, "a", encoding="utf-8")
            except OSError as exc:
                raise StorageError(f"cannot open event log: {exc}") from exc

    def _load_existing(self) -> None:
        assert self._dir is not None
        snap_path = self._dir / SNAPSHOT_FILE
        log_path = self._dir / EVENTS_FILE
        if snap_path.exists():
            self._state = StoreState.from_snapshot(json.loads(snap_path.read_text(encoding="utf-8")))
        if log_path.exists():
            with open(log_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    event = PipelineEvent.from_line(line)
                    self._events.append(event)
                    if event.seq > self._state.last_seq:
                        _check_event(self._state, event)
                        _mutate_state(self._state, event)

    # -- writing -----------------------------------------------------------

    def append(self, kind: str, data: dict, key: str | None = None) -> int:
        """Validate, persist, and apply one event; returns its sequence number.

        A repeated idempotency key is a no-op returning the original seq.
        """
        with self._lock:
            if key is not None and key in self._state.idempotency_keys:
                return self._state.idempotency_keys[key]
            event = PipelineEvent(
                seq=self._state.last_seq + 1, kind=kind, at=utc_now_iso(), data=data, key=key,
            )
            _check_event(self._state, event)
            if self._fh is not None:
                try:
                    self._fh.write(event.to_line() + "\n")
                    self._fh.flush()
                    os.fsync(self._fh.fileno())
                except OSError as exc:
                    raise StorageError(f"event append failed: {exc}") from exc
            self._events.append(event)
            _mutate_state(self._state, event)
            return event.seq

    def checkpoint(self) -> None:
        if self._dir is None:
            return
        with self._lock:
            tmp = self._dir / (SNAPSHOT_FILE + ".tmp")
            tmp.write_text(self._state.export_canonical(), encoding="utf-8")
            tmp.replace(self._dir / SNAPSHOT_FILE)

    def close(self) -> None:
        with self._lock:
            self.checkpoint()
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    # -- reading -----------------------------------------------------------

    @property
    def state(self) -> StoreState:
        return self._state

    def events(self) -> list[PipelineEvent]:
        with self._lock:
            return list(self._events)

    def replay_check(self) -> bool:
        """True iff a from-scratch replay reproduces the live state byte-for-byte."""
        with self._lock:
            rebuilt = replay(self._events)
            return rebuilt.export_canonical() == self._state.export_canonical()

    def fold_prefixes(self, check: Callable[[StoreState, PipelineEvent], None]) -> int:
        """Replay from scratch, invoking ``check(state, event)`` after every
        event; equivalent to validating every log prefix in one O(n) pass."""
        with self._lock:
            events = list(self._events)
        state = StoreState()
        for event in events:
            _check_event(state, event)
            _mutate_state(state, event)
            check(state, event)
        return len(events)


def load_snapshot(directory: str | Path) -> StoreState:
    """Open a store directory read-only and return its full state."""
    store = Store(directory)
    try:
        return store.state
    finally:
        if store._fh is not None:
            store._fh.close()
