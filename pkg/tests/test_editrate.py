import random
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscn.errors import EmptyReference
from hscn.metrics import edit_rate, word_edit_distance

from conftest import WORDS


# Recursive memoized DP, written independently of the two-row implementation.
def oracle_distance(a: tuple, b: tuple) -> int:
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )
    return d(len(a), len(b))


def test_identical_is_zero():
    assert edit_rate("same words here", "same words here") == 0.0


def test_one_substitution_in_ten_words():
    original = " ".join(f"w{i}" for i in range(10))
    edited = original.replace("w3", "q3")
    assert edit_rate(original, edited) == pytest.approx(0.1)


def test_empty_reference_raises():
    with pytest.raises(EmptyReference):
        edit_rate("anything", "   ")


def test_insert_and_delete_costs():
    assert word_edit_distance(["a", "b"], ["a", "b", "c"]) == 1
    assert word_edit_distance(["a", "b", "c"], ["a", "c"]) == 1
    assert word_edit_distance([], ["x", "y"]) == 2


def _apply_script(rng, words):
    """Random insert/delete/substitute script over a word list."""
    out = list(words)
    for _ in range(rng.randint(1, 6)):
        op = rng.choice(("ins", "del", "sub"))
        if op == "ins" or not out:
            out.insert(rng.randint(0, len(out)), rng.choice(WORDS))
        elif op == "del" and len(out) > 1:
            out.pop(rng.randrange(len(out)))
        else:
            out[rng.randrange(len(out))] = rng.choice(WORDS)
    return out


def test_dp_oracle_on_random_scripts():
    rng = random.Random(31337)
    for _ in range(500):
        base = [rng.choice(WORDS) for _ in range(rng.randint(1, 15))]
        edited = _apply_script(rng, base)
        if not edited:
            edited = [rng.choice(WORDS)]
        machine = " ".join(base)
        postedited = " ".join(edited)
        expected = oracle_distance(tuple(base), tuple(edited)) / len(edited)
        assert edit_rate(machine, postedited) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=100)
@given(
    st.lists(st.sampled_from(WORDS), max_size=8),
    st.lists(st.sampled_from(WORDS), max_size=8),
    st.lists(st.sampled_from(WORDS), max_size=8),
)
def test_triangle_inequality(a, b, c):
    assert word_edit_distance(a, c) <= word_edit_distance(a, b) + word_edit_distance(b, c)
