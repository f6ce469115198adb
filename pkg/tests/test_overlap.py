import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscn.errors import EmptyTrainingSet
from hscn.metrics import corpus_novelty, jaccard, novelty
from hscn.normalize import token_set

from conftest import WORDS


def test_identical_candidate_is_zero():
    assert novelty("all people deserve respect", ["All people deserve respect!"]) == 0.0


def test_disjoint_vocabulary_is_one():
    assert novelty("aaa bbb", ["xxx yyy", "zzz www"]) == 1.0


def test_hand_computed_jaccard():
    # tokens {do,you,have,a,link} vs {any,source,do,you}: overlap 2, union 7
    value = novelty("Do you have a link?", ["Any source, do you?", "zz qq"])
    assert value == pytest.approx(1.0 - 2.0 / 7.0, abs=1e-12)


def test_empty_training_set_raises():
    with pytest.raises(EmptyTrainingSet):
        novelty("a", [])
    with pytest.raises(EmptyTrainingSet):
        corpus_novelty(["a"], [])


def test_mean_variant_differs():
    training = ["aaa bbb ccc", "xxx yyy zzz"]
    cand = "aaa bbb ccc"
    assert novelty(cand, training, variant="max") == 0.0
    assert novelty(cand, training, variant="mean") == pytest.approx(0.5)


def test_corpus_novelty_is_mean():
    training = ["one two three"]
    cands = ["one two three", "four five six"]
    assert corpus_novelty(cands, training) == pytest.approx(0.5)


def test_set_oracle_on_random_pairs():
    rng = random.Random(99)
    for _ in range(300):
        cand = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 12)))
        train = [
            " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 12)))
            for _ in range(rng.randint(1, 5))
        ]
        # independent set-based oracle
        cset = set(token_set(cand))
        best = 0.0
        for t in train:
            tset = set(token_set(t))
            union = cset | tset
            sim = (len(cset & tset) / len(union)) if union else 1.0
            best = max(best, sim)
        assert novelty(cand, train) == pytest.approx(1.0 - best, abs=1e-12)


@settings(max_examples=100)
@given(st.data())
def test_novelty_monotone_in_training_set(data):
    words = st.sampled_from(WORDS)
    text = st.lists(words, min_size=1, max_size=8).map(" ".join)
    cand = data.draw(text)
    base = data.draw(st.lists(text, min_size=1, max_size=4))
    extra = data.draw(st.lists(text, min_size=1, max_size=4))
    assert novelty(cand, base + extra) <= novelty(cand, base) + 1e-12


def test_bounds():
    assert 0.0 <= novelty("a b c", ["a x", "b y"]) <= 1.0
    assert jaccard(frozenset(), frozenset()) == 1.0
