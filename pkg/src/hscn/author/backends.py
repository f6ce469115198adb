"""Author backends: a wire-protocol client for external generation servers
and a deterministic stub for offline runs.

Remote protocol: a single POST endpoint taking
``{prompt, max_new_tokens, top_p, temperature, n_samples}`` and returning
``{"texts": [...]}``. Decoding (nucleus sampling etc.) happens server-side,
next to the model; this client only moves text.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import httpx

from ..errors import (
    BackendTimeout,
    EmptyFixtureBank,
    MalformedResponse,
)
from ..pairs import DEFAULT_MARKERS, MarkerFormat, parse_stream


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str = ""
    max_new_tokens: int = 256
    top_p: float = 0.9
    temperature: float = 1.0
    n_samples: int = 1

    def __post_init__(self):
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be > 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def to_payload(self) -> dict:
        return {
            "prompt": self.prompt,
            "max_new_tokens": self.max_new_tokens,
            "top_p": self.top_p,
            "temperature": self.temperature,
            "n_samples": self.n_samples,
        }


@dataclass(frozen=True)
class AuthorBackend:
    """Backend configuration record; ``make_backend`` turns it into a client."""

    kind: str = "stub"  # "remote" | "stub"
    endpoint: str = ""
    timeout: float = 30.0
    retries: int = 2
    stub_seed: int = 0
    bank_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("remote", "stub"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote backend needs an endpoint URL")


class RemoteAuthorClient:
    """HTTP client with bounded retries for the generation protocol."""

    def __init__(self, cfg: AuthorBackend, client: httpx.Client | None = None):
        self.cfg = cfg
        self._client = client or httpx.Client(timeout=cfg.timeout)

    def health(self) -> bool:
        """Cheap real-path probe: a one-token generation round trip."""
        try:
            texts = self.generate(GenerationRequest(prompt="", max_new_tokens=1, n_samples=1))
        except (BackendTimeout, MalformedResponse):
            return False
        return isinstance(texts, list)

    def generate(self, req: GenerationRequest) -> list[str]:
        last_error: Exception | None = None
        for attempt in range(self.cfg.retries + 1):
            if attempt:
                time.sleep(min(0.1 * (2 ** (attempt - 1)), 2.0))
            try:
                resp = self._client.post(self.cfg.endpoint, json=req.to_payload())
            except httpx.TimeoutException as exc:
                last_error = exc
                continue
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = MalformedResponse(
                    f"server error {resp.status_code}", status=resp.status_code,
                )
                continue
            if resp.status_code != 200:
                raise MalformedResponse(
                    f"unexpected status {resp.status_code}", status=resp.status_code,
                )
            try:
                body = resp.json()
            except ValueError as exc:
                raise MalformedResponse("response body is not JSON") from exc
            texts = body.get("texts") if isinstance(body, dict) else None
            if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                raise MalformedResponse("response must carry a 'texts' list of strings")
            return texts
        raise BackendTimeout(
            f"backend unreachable after {self.cfg.retries + 1} attempts: {last_error}",
            endpoint=self.cfg.endpoint,
        )


class FixtureBank:
    """Marker-format example pairs the stub author resamples from."""

    def __init__(self, raw: str, fmt: MarkerFormat = DEFAULT_MARKERS):
        result = parse_stream(raw, fmt)
        pairs = [b for b in result.blocks if b.is_pair]
        if not pairs:
            raise EmptyFixtureBank("fixture bank contains no well-formed pairs")
        self.hs_texts = sorted({b.hs for b in pairs if b.hs})
        self.cn_texts = sorted({b.cn for b in pairs})

    @classmethod
    def load(cls, path: str | Path | None = None, fmt: MarkerFormat = DEFAULT_MARKERS) -> "FixtureBank":
        if path is not None:
            raw = Path(path).read_text(encoding="utf-8")
        else:
            raw = resources.files("hscn.author.data").joinpath("pair_bank.txt").read_text(encoding="utf-8")
        return cls(raw, fmt)


class WordChain:
    """Order-2 word chain so stub output varies lexically but stays text-like."""

    def __init__(self, texts: list[str]):
        self.starts: list[tuple[str, str]] = []
        self.transitions: dict[tuple[str, str], list[str]] = {}
        for text in texts:
            words = text.split()
            if len(words) < 2:
                continue
            self.starts.append((words[0], words[1]))
            for i in range(len(words) - 2):
                self.transitions.setdefault((words[i], words[i + 1]), []).append(words[i + 2])

    def sample(self, rng: random.Random, max_words: int) -> str:
        w1, w2 = rng.choice(self.starts)
        words = [w1, w2]
        while len(words) < max_words:
            nexts = self.transitions.get((words[-2], words[-1]))
            if not nexts:
                break
            words.append(rng.choice(nexts))
        return " ".join(words)


def _stable_seed(*parts: object) -> int:
    digest = hashlib.sha256("\x00".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


# Probability of appending one extra, deliberately truncated block so the
# parser's degradation path gets exercised on realistic streams.
TRUNCATION_RATE = 0.15


def stub_generate(
    req: GenerationRequest,
    seed: int,
    bank: FixtureBank,
    fmt: MarkerFormat = DEFAULT_MARKERS,
) -> str:
    """Deterministic marker-format text for (req, seed).

    When the prompt ends with the HS end marker (a serialized HS condition)
    the first emitted block is the conditioned CN continuation; full pair
    blocks follow. Always emits ``n_samples`` complete blocks and sometimes
    one truncated trailing block. ``max_new_tokens`` caps each block's CN.
    """
    rng = random.Random(_stable_seed(seed, req.prompt, req.n_samples, req.max_new_tokens))
    chain = WordChain(bank.cn_texts)
    cap = max(2, min(req.max_new_tokens, 40))

    def cn() -> str:
        return chain.sample(rng, rng.randint(4, cap))

    def full_block() -> str:
        hs = rng.choice(bank.hs_texts)
        return f"{fmt.hs_start} {hs} {fmt.hs_end} {fmt.cn_start} {cn()} {fmt.cn_end}"

    parts: list[str] = []
    remaining = req.n_samples
    if req.prompt.rstrip().endswith(fmt.hs_end):
        parts.append(f"{fmt.cn_start} {cn()} {fmt.cn_end}")
        remaining -= 1
    for _ in range(remaining):
        parts.append(full_block())
    if rng.random() < TRUNCATION_RATE:
        hs = rng.choice(bank.hs_texts)
        truncated_cn = chain.sample(rng, rng.randint(2, 6))
        parts.append(f"{fmt.hs_start} {hs} {fmt.hs_end} {fmt.cn_start} {truncated_cn}")
    return " ".join(parts)


class StubAuthor:
    """Offline author: deterministic, bank-backed, always healthy."""

    def __init__(self, cfg: AuthorBackend, fmt: MarkerFormat = DEFAULT_MARKERS):
        self.cfg = cfg
        self.fmt = fmt
        self.bank = FixtureBank.load(cfg.bank_path, fmt)

    def health(self) -> bool:
        return True

    def generate(self, req: GenerationRequest) -> list[str]:
        return [stub_generate(req, self.cfg.stub_seed, self.bank, self.fmt)]


def make_backend(
    cfg: AuthorBackend,
    fmt: MarkerFormat = DEFAULT_MARKERS,
    client: httpx.Client | None = None,
):
    if cfg.kind == "remote":
        return RemoteAuthorClient(cfg, client=client)
    return StubAuthor(cfg, fmt)
