"""Exception hierarchy shared by every module.

Each error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures to structured responses without string matching.
"""

from __future__ import annotations

from typing import Any


class PipelineError(Exception):
    """Base class; ``code`` is stable, ``detail`` is free-form context."""

    code = "pipeline_error"
    http_status = 400

    def __init__(self, message: str, **detail: Any):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_payload(self) -> dict:
        payload: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.detail:
            payload["detail"] = self.detail
        return payload


# --- corpus store ---------------------------------------------------------

class EmptyField(PipelineError):
    code = "empty_field"


class MarkerCollision(PipelineError):
    code = "marker_collision"


class UnknownId(PipelineError):
    code = "unknown_id"
    http_status = 404


class DuplicateId(PipelineError):
    code = "duplicate_id"
    http_status = 409


class StorageError(PipelineError):
    """I/O failure talking to the event log; safe to retry."""

    code = "storage_error"
    http_status = 503
    retriable = True


class WrongState(PipelineError):
    code = "wrong_state"
    http_status = 409


# --- metrics --------------------------------------------------------------

class EmptyCorpus(PipelineError):
    code = "empty_corpus"


class EmptyTrainingSet(PipelineError):
    code = "empty_training_set"


class MissingReference(PipelineError):
    code = "missing_reference"


class EmptyReference(PipelineError):
    code = "empty_reference"


class UnlabeledPair(PipelineError):
    code = "unlabeled_pair"


# --- author ---------------------------------------------------------------

class BackendTimeout(PipelineError):
    code = "backend_timeout"
    http_status = 504
    retriable = True


class BackendUnhealthy(PipelineError):
    code = "backend_unhealthy"
    http_status = 503


class MalformedOutput(PipelineError):
    code = "malformed_output"


class MalformedResponse(PipelineError):
    code = "malformed_response"


class EmptyFixtureBank(PipelineError):
    code = "empty_fixture_bank"


# --- review ---------------------------------------------------------------

class DuplicateAnnotator(PipelineError):
    code = "duplicate_annotator"
    http_status = 409


class TooManyScores(PipelineError):
    code = "too_many_scores"
    http_status = 409


class InsufficientPool(PipelineError):
    code = "insufficient_pool"


class SingleClassDataset(PipelineError):
    code = "single_class_dataset"


class EmptyTestSet(PipelineError):
    code = "empty_test_set"


# --- orchestrator ---------------------------------------------------------

class EmptyEdit(PipelineError):
    code = "empty_edit"


class NoEvents(PipelineError):
    code = "no_events"
    http_status = 404
