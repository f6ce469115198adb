"""Candidate production: conditioned generation plus over-generation harvest.

The author is asked for a CN conditioned on one HS; whatever complete
HS-CN blocks it emits beyond that answer are harvested as brand-new
candidates. Echo candidates (CN equal to its own HS) are dropped here so
the degenerate case never enters the pool.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from ..errors import EmptyField, MalformedOutput, BackendUnhealthy, PipelineError
from ..events import GENERATED, Store
from ..normalize import normalize_text
from ..pairs import DEFAULT_MARKERS, Fragment, HsCnPair, MarkerFormat, PairSource, parse_stream
from .backends import AuthorBackend, GenerationRequest, make_backend

logger = logging.getLogger(__name__)


@dataclass
class GenerationOutcome:
    primary: HsCnPair
    harvested: list[HsCnPair] = field(default_factory=list)
    alternates: list[str] = field(default_factory=list)  # extra conditioned CNs, unused
    fragments: list[Fragment] = field(default_factory=list)
    latency_s: float = 0.0

    @property
    def candidates(self) -> list[HsCnPair]:
        return [self.primary, *self.harvested]


def generate_for_hs(
    hs: str,
    backend,
    req: GenerationRequest,
    fmt: MarkerFormat = DEFAULT_MARKERS,
) -> GenerationOutcome:
    """One conditioned generation call, parsed and harvested.

    The prompt is the serialized HS condition; the first usable CN block in
    the output answers it. Raises MalformedOutput when no block survives
    parsing and the echo guard (the raw text is logged for inspection).
    """
    if not normalize_text(hs):
        raise EmptyField("hs is empty")
    prompt = f"{fmt.hs_start} {hs} {fmt.hs_end}"
    started = time.perf_counter()
    texts = backend.generate(replace(req, prompt=prompt))
    latency = time.perf_counter() - started

    hs_norm = normalize_text(hs)
    primary: HsCnPair | None = None
    harvested: list[HsCnPair] = []
    alternates: list[str] = []
    fragments: list[Fragment] = []
    for text in texts:
        result = parse_stream(text, fmt)
        fragments.extend(result.fragments)
        for block in result.blocks:
            block_hs = block.hs if block.hs is not None else hs
            echo = normalize_text(block.cn) == normalize_text(block_hs)
            if echo:
                fragments.append(Fragment(text=block.cn, reason="echo candidate", start=block.start, end=block.end))
                continue
            if primary is None:
                primary = HsCnPair(hate_speech=hs, counter_narrative=block.cn, source=PairSource.generated)
            elif block.is_pair:
                harvested.append(
                    HsCnPair(hate_speech=block.hs, counter_narrative=block.cn, source=PairSource.generated)
                )
            else:
                alternates.append(block.cn)
    if primary is None:
        logger.warning("no parsable CN block for hs=%r; raw output: %r", hs_norm[:80], texts)
        raise MalformedOutput(
            "backend output contained no usable CN block",
            n_texts=len(texts), n_fragments=len(fragments),
        )
    return GenerationOutcome(
        primary=primary, harvested=harvested, alternates=alternates,
        fragments=fragments, latency_s=latency,
    )


@dataclass
class BatchReport:
    requested: int = 0
    succeeded: int = 0
    failures: list[dict] = field(default_factory=list)
    n_primary: int = 0
    n_harvested: int = 0
    n_alternates: int = 0
    n_fragments: int = 0
    latencies_s: list[float] = field(default_factory=list)

    @property
    def mean_latency_s(self) -> float:
        return sum(self.latencies_s) / len(self.latencies_s) if self.latencies_s else 0.0

    def to_dict(self) -> dict:
        return {
            "requested": self.requested,
            "succeeded": self.succeeded,
            "failed": len(self.failures),
            "failures": self.failures,
            "n_primary": self.n_primary,
            "n_harvested": self.n_harvested,
            "n_alternates": self.n_alternates,
            "n_fragments": self.n_fragments,
            "mean_latency_s": round(self.mean_latency_s, 6),
        }


def batch_generate(
    hs_list: list[str],
    backend_cfg: AuthorBackend,
    req: GenerationRequest,
    fmt: MarkerFormat = DEFAULT_MARKERS,
    max_in_flight: int = 4,
    store: Store | None = None,
) -> tuple[list[HsCnPair], BatchReport]:
    """Run generate_for_hs over a list with bounded in-flight requests.

    Per-item failures are recorded in the report and never abort the batch.
    Results merge in input order; with a store, every candidate is
    persisted as a generated event.
    """
    report = BatchReport(requested=len(hs_list))
    if not hs_list:
        return [], report
    backend = make_backend(backend_cfg, fmt)
    if not backend.health():
        raise BackendUnhealthy("author backend failed its health probe", endpoint=backend_cfg.endpoint)

    def one(hs: str):
        try:
            return generate_for_hs(hs, backend, req, fmt)
        except PipelineError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        outcomes = list(pool.map(one, hs_list))

    candidates: list[HsCnPair] = []
    for hs, outcome in zip(hs_list, outcomes):
        if isinstance(outcome, PipelineError):
            report.failures.append({"hs": hs, "code": outcome.code, "message": outcome.message})
            continue
        report.succeeded += 1
        report.n_primary += 1
        report.n_harvested += len(outcome.harvested)
        report.n_alternates += len(outcome.alternates)
        report.n_fragments += len(outcome.fragments)
        report.latencies_s.append(outcome.latency_s)
        candidates.extend(outcome.candidates)
    if store is not None:
        for pair in candidates:
            store.append(GENERATED, {"pair": pair.to_record()})
    return candidates, report
