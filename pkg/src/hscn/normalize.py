"""Shared text normalization.

One policy is used everywhere text equality matters: dedup, token-set
metrics, and n-gram streams. Keeping a single policy is what makes the
metrics comparable across corpora.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_WS_RE = re.compile(r"\s+")
_PUNCT_RE = re.compile(r"([^\w\s])")


@dataclass(frozen=True)
class NormalizationPolicy:
    lowercase: bool = True
    unicode_normalize: bool = True
    collapse_whitespace: bool = True
    strip_punct_for_sets: bool = True


DEFAULT_POLICY = NormalizationPolicy()


def normalize_text(text: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> str:
    """Canonical form of a text under ``policy``. Idempotent.

    Lowercasing happens before NFC: casefolding can emit decomposed
    sequences (e.g. J+combining caron), and running NFC afterwards keeps
    the output a fixed point of the whole pipeline.
    """
    if policy.lowercase:
        text = text.lower()
    if policy.unicode_normalize:
        text = unicodedata.normalize("NFC", text)
    if policy.collapse_whitespace:
        text = _WS_RE.sub(" ", text).strip()
    return text


def tokens(text: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> list[str]:
    """Word tokens: punctuation is split off as separate single-char tokens."""
    spaced = _PUNCT_RE.sub(r" \1 ", normalize_text(text, policy))
    return spaced.split()


def token_set(text: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> frozenset[str]:
    """Token set for overlap metrics; drops punctuation tokens by default."""
    toks = tokens(text, policy)
    if policy.strip_punct_for_sets:
        toks = [t for t in toks if not _PUNCT_RE.fullmatch(t)]
    return frozenset(toks)
