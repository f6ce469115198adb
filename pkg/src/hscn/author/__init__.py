from .backends import (
    AuthorBackend,
    FixtureBank,
    GenerationRequest,
    RemoteAuthorClient,
    StubAuthor,
    make_backend,
    stub_generate,
)
from .generate import BatchReport, GenerationOutcome, batch_generate, generate_for_hs

__all__ = [
    "AuthorBackend",
    "BatchReport",
    "FixtureBank",
    "GenerationOutcome",
    "GenerationRequest",
    "RemoteAuthorClient",
    "StubAuthor",
    "batch_generate",
    "generate_for_hs",
    "make_backend",
    "stub_generate",
]
