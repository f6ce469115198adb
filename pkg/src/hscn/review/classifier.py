"""Machine reviewer: scorer clients and the native baseline classifier.

The baseline is a linear model over hashed character 3-5-gram and word
unigram features of "hs <sep> cn". It exists so the pipeline runs offline
end to end; it stands in for, and never claims parity with, fine-tuned
transformer scorers reached through the remote wire protocol
(``POST {hs, cn} -> {label, confidence}``).
"""

from __future__ import annotations

import pickle
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import FeatureUnion, Pipeline
from sklearn.feature_extraction.text import HashingVectorizer

from ..errors import (
    BackendTimeout,
    EmptyTestSet,
    MalformedResponse,
    SingleClassDataset,
)
from ..pairs import HsCnPair
from .dataset import SUITABLE, UNSUITABLE, LabeledPair

DEFAULT_THRESHOLD = 0.5
_SEPARATOR = " || "


@dataclass(frozen=True)
class PairScore:
    pair_id: str
    label: str  # suitable | unsuitable
    confidence: float
    scorer: str  # remote | baseline

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")

    def to_record(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "label": self.label,
            "confidence": self.confidence,
            "scorer": self.scorer,
        }


def _join(hs: str, cn: str) -> str:
    return f"{hs}{_SEPARATOR}{cn}"


class BaselineScorer:
    """suitable-probability scorer backed by a fitted sklearn pipeline."""

    kind = "baseline"

    def __init__(self, pipeline: Pipeline, seed: int):
        self._pipeline = pipeline
        self.seed = seed
        self._positive_index = list(pipeline.classes_).index(SUITABLE)

    def confidence(self, hs: str, cn: str) -> float:
        proba = self._pipeline.predict_proba([_join(hs, cn)])[0]
        return float(proba[self._positive_index])

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            pickle.dump({"pipeline": self._pipeline, "seed": self.seed}, fh)

    @classmethod
    def load(cls, path: str | Path) -> "BaselineScorer":
        with open(path, "rb") as fh:
            blob = pickle.load(fh)
        return cls(blob["pipeline"], blob["seed"])


class RemoteScorer:
    """Client for an external confidence-estimation service."""

    kind = "remote"

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2,
                 client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.retries = retries
        self._client = client or httpx.Client(timeout=timeout)

    def confidence(self, hs: str, cn: str) -> float:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(min(0.1 * (2 ** (attempt - 1)), 2.0))
            try:
                resp = self._client.post(self.endpoint, json={"hs": hs, "cn": cn})
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = MalformedResponse(f"server error {resp.status_code}")
                continue
            try:
                body = resp.json()
            except ValueError as exc:
                raise MalformedResponse("scorer response is not JSON") from exc
            if not isinstance(body, dict) or "confidence" not in body:
                raise MalformedResponse("scorer response must carry 'confidence'")
            conf = body["confidence"]
            if not isinstance(conf, (int, float)) or not (0.0 <= conf <= 1.0):
                raise MalformedResponse(f"confidence out of range: {conf!r}")
            return float(conf)
        raise BackendTimeout(
            f"scorer unreachable after {self.retries + 1} attempts: {last_error}",
            endpoint=self.endpoint,
        )


def train_baseline(dataset: Sequence[LabeledPair], seed: int = 0) -> BaselineScorer:
    """Fit the native baseline; deterministic for a fixed seed."""
    labels = {item.label for item in dataset}
    if len(labels) < 2:
        raise SingleClassDataset(f"need both classes, got {sorted(labels)}")
    features = FeatureUnion([
        ("char", HashingVectorizer(analyzer="char_wb", ngram_range=(3, 5),
                                   n_features=2 ** 16, alternate_sign=False)),
        ("word", HashingVectorizer(analyzer="word", ngram_range=(1, 1),
                                   n_features=2 ** 16, alternate_sign=False)),
    ])
    model = LogisticRegression(C=10.0, max_iter=2000, random_state=seed)
    pipeline = Pipeline([("features", features), ("model", model)])
    texts = [_join(item.hs, item.cn) for item in dataset]
    pipeline.fit(texts, [item.label for item in dataset])
    return BaselineScorer(pipeline, seed)


def score_pair(pair: HsCnPair, scorer, threshold: float = DEFAULT_THRESHOLD) -> PairScore:
    """suitable iff the scorer's confidence clears the decision threshold."""
    conf = scorer.confidence(pair.hate_speech, pair.counter_narrative)
    label = SUITABLE if conf >= threshold else UNSUITABLE
    return PairScore(pair_id=pair.id, label=label, confidence=conf, scorer=scorer.kind)


@dataclass
class EvalResult:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    def to_dict(self) -> dict:
        return {
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
        }


def evaluate_classifier(
    scorer,
    test_set: Sequence[LabeledPair],
    threshold: float = DEFAULT_THRESHOLD,
) -> EvalResult:
    """Confusion matrix plus P/R/F1; positive class is ``suitable``."""
    if not test_set:
        raise EmptyTestSet("empty test set")
    tp = fp = fn = tn = 0
    for item in test_set:
        predicted = SUITABLE if scorer.confidence(item.hs, item.cn) >= threshold else UNSUITABLE
        if item.label == SUITABLE:
            if predicted == SUITABLE:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == SUITABLE:
                fp += 1
            else:
                tn += 1
    return EvalResult(tp=tp, fp=fp, fn=fn, tn=tn)
