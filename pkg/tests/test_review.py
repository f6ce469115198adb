import random

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscn.errors import (
    BackendTimeout,
    DuplicateAnnotator,
    EmptyTestSet,
    InsufficientPool,
    MalformedResponse,
    SingleClassDataset,
    TooManyScores,
)
from hscn.pairs import PairSource
from hscn.review import (
    ClassifierDatasetSpec,
    EvalResult,
    FilterTier,
    LabeledPair,
    RemoteScorer,
    ReviewScore,
    TierReport,
    aggregate,
    build_classifier_dataset,
    evaluate_classifier,
    score_pair,
    train_baseline,
)
from hscn.review.dataset import PROV_ECHO, PROV_RANDOM_HS, SUITABLE, UNSUITABLE
from hscn.review.scoring import TIER_ORDER

from conftest import make_pair


def _scores(a: int, b: int, bad_a=False, bad_b=False):
    return [
        ReviewScore(pair_id="p", annotator_id="a1", score=a, bad_hs=bad_a),
        ReviewScore(pair_id="p", annotator_id="a2", score=b, bad_hs=bad_b),
    ]


# --- aggregation -------------------------------------------------------------

@pytest.mark.parametrize("a,b,tier", [
    (2, 3, FilterTier.geq2),
    (2, 2, FilterTier.geq2),
    (1, 2, FilterTier.geq1_only),
    (1, 1, FilterTier.geq1_only),
    (0, 3, FilterTier.discarded),
    (0, 0, FilterTier.discarded),
])
def test_threshold_rules(a, b, tier):
    assert aggregate(_scores(a, b)) == tier


def test_bad_hs_dominates_high_scores():
    assert aggregate(_scores(3, 3, bad_a=True)) == FilterTier.bad_hs
    assert aggregate(_scores(0, 3, bad_b=True)) == FilterTier.bad_hs


def test_single_score_is_pending():
    assert aggregate([ReviewScore(pair_id="p", annotator_id="a1", score=2)]) == FilterTier.pending


def test_duplicate_annotator_rejected():
    scores = [
        ReviewScore(pair_id="p", annotator_id="same", score=2),
        ReviewScore(pair_id="p", annotator_id="same", score=3),
    ]
    with pytest.raises(DuplicateAnnotator):
        aggregate(scores)


def test_three_judgments_rejected():
    scores = _scores(1, 2) + [ReviewScore(pair_id="p", annotator_id="a3", score=3)]
    with pytest.raises(TooManyScores):
        aggregate(scores)


@settings(max_examples=200)
@given(
    st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3),
    st.booleans(), st.booleans(),
)
def test_aggregation_symmetric(a, b, bad_a, bad_b):
    forward = aggregate(_scores(a, b, bad_a, bad_b))
    backward = aggregate(_scores(b, a, bad_b, bad_a))
    assert forward == backward


@settings(max_examples=200)
@given(
    st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3),
    st.booleans(), st.booleans(),
)
def test_raising_a_score_never_lowers_tier(a, b, bad_a, bad_b):
    tier = aggregate(_scores(a, b, bad_a, bad_b))
    if a < 3:
        raised = aggregate(_scores(a + 1, b, bad_a, bad_b))
        assert TIER_ORDER[raised] >= TIER_ORDER[tier]


# --- tier report over a synthetic stream ------------------------------------

def synthetic_tier_stream(n_geq2=276, n_geq1_only=626, n_zero=1723, n_bad=145, seed=0):
    """Score streams constructed to land in each tier, then shuffled."""
    rng = random.Random(seed)
    streams = []
    for _ in range(n_geq2):
        streams.append(_scores(rng.choice([2, 3]), rng.choice([2, 3])))
    for _ in range(n_geq1_only):
        streams.append(_scores(1, rng.choice([1, 2, 3])))
    for _ in range(n_zero):
        streams.append(_scores(0, rng.choice([0, 1, 2, 3])))
    for _ in range(n_bad):
        streams.append(_scores(rng.choice([0, 1, 2, 3]), 3, bad_a=True))
    rng.shuffle(streams)
    return streams


def test_tier_percentages_match_reported_split():
    tiers = [aggregate(s) for s in synthetic_tier_stream()]
    report = TierReport.from_tiers(tiers)
    assert report.counts == {"geq2": 276, "geq1_only": 626, "discarded": 1723, "bad_hs": 145}
    assert report.geq1_cumulative == 902
    assert report.total == 2770
    pct = report.percentages()
    assert abs(pct["geq2"] - 10.0) <= 0.05
    assert abs(pct["geq1_cumulative"] - 32.6) <= 0.05
    assert abs(pct["discarded"] - 62.2) <= 0.05
    assert abs(pct["bad_hs"] - 5.2) <= 0.05
    # raw counts always travel with percentages
    assert TierReport.from_tiers(tiers).to_dict()["counts"]["geq2"] == 276


def test_tier_rates():
    tiers = [aggregate(s) for s in synthetic_tier_stream()]
    report = TierReport.from_tiers(tiers)
    assert report.rate("human_geq2") == pytest.approx(276 / 2770)
    assert report.rate("human_geq1") == pytest.approx(902 / 2770)


# --- classifier dataset -------------------------------------------------------

def _pools(rng, n_pos=30, n_zero=40, n_hs=20):
    positives = [make_pair(rng, source=PairSource.seed_dataset) for _ in range(n_pos)]
    zeros = [make_pair(rng) for _ in range(n_zero)]
    hs_pool = [f"pool hate speech {i}" for i in range(n_hs)]
    return positives, zeros, hs_pool


def test_dataset_synthetic_negatives(rng):
    positives, zeros, hs_pool = _pools(rng)
    spec = ClassifierDatasetSpec(verbatim_negatives=50, random_pair_negatives=50,
                                 balance=False, rng_seed=1)
    dataset, manifest = build_classifier_dataset(positives, zeros, hs_pool, spec)
    echoes = [d for d in dataset if d.provenance == PROV_ECHO]
    randoms = [d for d in dataset if d.provenance == PROV_RANDOM_HS]
    assert len(echoes) == 50 and all(d.hs == d.cn for d in echoes)
    assert len(randoms) == 50 and all(d.hs != d.cn for d in randoms)
    assert all(d.label == UNSUITABLE for d in echoes + randoms)
    assert manifest.provenance_counts[PROV_ECHO] == 50
    assert manifest.total == len(dataset)


def test_dataset_balancing(rng):
    positives, zeros, hs_pool = _pools(rng, n_pos=10, n_zero=900)
    spec = ClassifierDatasetSpec(balance=True, rng_seed=7)
    dataset, manifest = build_classifier_dataset(positives, zeros, hs_pool, spec)
    assert manifest.n_positive == manifest.n_negative == 10
    # seeded subsample reproducible
    dataset2, _ = build_classifier_dataset(positives, zeros, hs_pool, spec)
    assert [d.to_record() for d in dataset] == [d.to_record() for d in dataset2]


def test_dataset_balanced_1373(rng):
    positives, zeros, hs_pool = _pools(rng, n_pos=1373, n_zero=1400)
    spec = ClassifierDatasetSpec(verbatim_negatives=50, random_pair_negatives=50,
                                 balance=True, rng_seed=0)
    _, manifest = build_classifier_dataset(positives, zeros, hs_pool, spec)
    assert manifest.n_positive == 1373
    assert manifest.n_negative == 1373


def test_dataset_insufficient_pool(rng):
    with pytest.raises(InsufficientPool):
        build_classifier_dataset([], [], ["h1", "h2"], ClassifierDatasetSpec())
    positives, zeros, _ = _pools(rng)
    with pytest.raises(InsufficientPool):
        build_classifier_dataset(positives, zeros, ["only-one"], ClassifierDatasetSpec())


# --- baseline classifier --------------------------------------------------------

def separable_fixture(rng, n=120):
    """Positives: coherent pairs; negatives: echoes and shuffled-word CNs."""
    dataset = []
    for i in range(n):
        hs = f"group {i % 7} deserves nothing but contempt and exclusion everywhere"
        cn = f"every group deserves respect and inclusion, claim {i} is baseless"
        dataset.append(LabeledPair(hs=hs, cn=cn, label=SUITABLE, provenance="fixture"))
        if i % 2 == 0:
            dataset.append(LabeledPair(hs=hs, cn=hs, label=UNSUITABLE, provenance=PROV_ECHO))
        else:
            words = cn.split()
            rng.shuffle(words)
            dataset.append(LabeledPair(hs=hs, cn=" ".join(words[:4] * 3),
                                       label=UNSUITABLE, provenance="shuffled"))
    rng.shuffle(dataset)
    return dataset


def test_baseline_separable_accuracy(rng):
    dataset = separable_fixture(rng)
    scorer = train_baseline(dataset, seed=0)
    result = evaluate_classifier(scorer, dataset)
    accuracy = (result.tp + result.tn) / len(dataset)
    assert accuracy >= 0.99


def test_baseline_rejects_echo(rng):
    scorer = train_baseline(separable_fixture(rng), seed=0)
    echo = make_pair(hs="all of them should vanish", cn="all of them should vanish")
    assert score_pair(echo, scorer).label == UNSUITABLE


def test_baseline_single_class_raises():
    rows = [LabeledPair(hs="a", cn="b", label=SUITABLE, provenance="x")] * 3
    with pytest.raises(SingleClassDataset):
        train_baseline(rows)


def test_baseline_deterministic(rng):
    dataset = separable_fixture(rng, n=40)
    a = train_baseline(dataset, seed=3)
    b = train_baseline(dataset, seed=3)
    probe = [("x y z", "z y x"), ("group 1 bad", "group 1 bad")]
    for hs, cn in probe:
        assert a.confidence(hs, cn) == b.confidence(hs, cn)


def test_baseline_save_load(tmp_path, rng):
    scorer = train_baseline(separable_fixture(rng, n=40), seed=1)
    path = tmp_path / "model.pkl"
    scorer.save(path)
    from hscn.review import BaselineScorer

    loaded = BaselineScorer.load(path)
    assert loaded.confidence("a b", "c d") == scorer.confidence("a b", "c d")


# --- evaluation harness -----------------------------------------------------------

class FixedScorer:
    kind = "baseline"

    def __init__(self, mapping, default=0.9):
        self.mapping = mapping
        self.default = default

    def confidence(self, hs, cn):
        return self.mapping.get((hs, cn), self.default)


def test_perfect_scorer_metrics():
    rows = [LabeledPair(hs=f"h{i}", cn=f"c{i}", label=SUITABLE, provenance="x") for i in range(5)]
    rows += [LabeledPair(hs=f"h{i}", cn=f"b{i}", label=UNSUITABLE, provenance="x") for i in range(5)]
    scorer = FixedScorer({(r.hs, r.cn): (0.9 if r.label == SUITABLE else 0.1) for r in rows})
    result = evaluate_classifier(scorer, rows)
    assert (result.f1, result.precision, result.recall) == (1.0, 1.0, 1.0)


def test_confusion_matrix_closed_form():
    result = EvalResult(tp=74, fp=26, fn=27, tn=75)
    assert result.precision == pytest.approx(74 / 100, abs=1e-9)
    assert result.recall == pytest.approx(74 / 101, abs=1e-9)
    p, r = 74 / 100, 74 / 101
    assert result.f1 == pytest.approx(2 * p * r / (p + r), abs=1e-9)
    assert round(result.precision, 2) == 0.74
    assert round(result.recall, 2) == 0.73
    assert result.f1 == pytest.approx(0.7363, abs=5e-4)


def test_all_suitable_scorer_on_balanced_set():
    rows = [LabeledPair(hs=f"h{i}", cn=f"c{i}", label=SUITABLE, provenance="x") for i in range(101)]
    rows += [LabeledPair(hs=f"g{i}", cn=f"b{i}", label=UNSUITABLE, provenance="x") for i in range(101)]
    result = evaluate_classifier(FixedScorer({}, default=0.99), rows)
    assert result.precision == pytest.approx(0.5)
    assert result.recall == pytest.approx(1.0)
    assert result.f1 == pytest.approx(2 / 3, abs=1e-9)


def test_empty_test_set():
    with pytest.raises(EmptyTestSet):
        evaluate_classifier(FixedScorer({}), [])


def test_f1_recomputed_from_confusion_counts(rng):
    scorer = train_baseline(separable_fixture(rng, n=60), seed=0)
    test_set = separable_fixture(random.Random(777), n=30)
    result = evaluate_classifier(scorer, test_set)
    p = result.tp / (result.tp + result.fp) if result.tp + result.fp else 0.0
    r = result.tp / (result.tp + result.fn) if result.tp + result.fn else 0.0
    expected = 2 * p * r / (p + r) if p + r else 0.0
    assert result.f1 == pytest.approx(expected, abs=1e-12)


# --- remote scorer ------------------------------------------------------------------

def _remote(handler, retries=1):
    transport = httpx.MockTransport(handler)
    return RemoteScorer("http://scorer/score", retries=retries,
                        client=httpx.Client(transport=transport))


def test_remote_scorer_threshold():
    scorer = _remote(lambda r: httpx.Response(200, json={"label": "suitable", "confidence": 0.74}))
    verdict = score_pair(make_pair(hs="h", cn="c"), scorer)
    assert verdict.label == SUITABLE
    assert verdict.confidence == 0.74
    assert verdict.scorer == "remote"


def test_remote_scorer_below_threshold():
    scorer = _remote(lambda r: httpx.Response(200, json={"confidence": 0.4}))
    assert score_pair(make_pair(hs="h", cn="c"), scorer).label == UNSUITABLE


def test_remote_scorer_malformed():
    scorer = _remote(lambda r: httpx.Response(200, json={"confidence": 7.0}))
    with pytest.raises(MalformedResponse):
        scorer.confidence("h", "c")


def test_remote_scorer_timeout():
    def handler(request):
        raise httpx.ConnectTimeout("slow")

    with pytest.raises(BackendTimeout):
        _remote(handler).confidence("h", "c")
