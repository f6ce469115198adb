"""hscn: tooling for curating hate-speech / counter-narrative pair datasets.

Candidate pairs come from a pluggable author backend, get filtered by
human and machine reviewers, reach expert validation/post-editing, and the
whole process is measured (diversity, novelty, quality, effort) from an
append-only event log.
"""

from .errors import PipelineError
from .events import Store, StoreState, load_snapshot, replay
from .normalize import DEFAULT_POLICY, NormalizationPolicy, normalize_text, token_set, tokens
from .pairs import (
    DEFAULT_MARKERS,
    CnType,
    HsCnPair,
    MarkerFormat,
    PairSource,
    PairState,
    dedup,
    parse_stream,
    serialize_pair,
)

__version__ = "0.1.0"

__all__ = [
    "CnType",
    "DEFAULT_MARKERS",
    "DEFAULT_POLICY",
    "HsCnPair",
    "MarkerFormat",
    "NormalizationPolicy",
    "PairSource",
    "PairState",
    "PipelineError",
    "Store",
    "StoreState",
    "__version__",
    "dedup",
    "load_snapshot",
    "normalize_text",
    "parse_stream",
    "replay",
    "serialize_pair",
    "token_set",
    "tokens",
]
